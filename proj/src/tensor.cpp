#include "docner/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace docner {

namespace {

std::string shape_str(const Mat& m) {
  std::ostringstream os;
  os << "(" << m.rows() << "x" << m.cols() << ")";
  return os.str();
}

std::string shape_str(const Var& v) { return shape_str(v.value()); }

void ensure_grad(Node& n) {
  if (n.grad.size() == 0) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  }
}

template <typename Expr>
void accum(const std::shared_ptr<Node>& p, const Expr& g) {
  if (!p->requires_grad) {
    return;
  }
  ensure_grad(*p);
  p->grad += g;
}

Var make_op(Mat value, std::initializer_list<Var> parents,
            std::function<void(const Mat&)> bp) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const Var& p : parents) {
    if (p.requires_grad()) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) {
    n->parents.reserve(parents.size());
    for (const Var& p : parents) {
      n->parents.push_back(p.shared());
    }
    n->backprop = std::move(bp);
  }
  return Var(n);
}

Var make_op(Mat value, std::span<const Var> parents,
            std::function<void(const Mat&)> bp) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const Var& p : parents) {
    if (p.requires_grad()) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) {
    n->parents.reserve(parents.size());
    for (const Var& p : parents) {
      n->parents.push_back(p.shared());
    }
    n->backprop = std::move(bp);
  }
  return Var(n);
}

}  // namespace

Mat glorot_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-limit, limit);
    }
  }
  return m;
}

Var transpose(const Var& a) {
  auto pa = a.shared();
  return make_op(a.value().transpose(), {a},
                 [pa](const Mat& g) { accum(pa, g.transpose()); });
}

Var reshape_rowmajor(const Var& a, Eigen::Index rows, Eigen::Index cols) {
  if (a.size() != rows * cols) {
    std::ostringstream os;
    os << "reshape: " << shape_str(a) << " has " << a.size()
       << " elements, target (" << rows << "x" << cols << ") needs "
       << rows * cols;
    throw ShapeError(os.str());
  }
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor flat = a.value();  // row-major copy of the source
  Mat out = Eigen::Map<const RowMajor>(flat.data(), rows, cols);
  auto pa = a.shared();
  Eigen::Index ar = a.rows(), ac = a.cols();
  return make_op(std::move(out), {a}, [pa, ar, ac](const Mat& g) {
    RowMajor gflat = g;
    Mat gin = Eigen::Map<const RowMajor>(gflat.data(), ar, ac);
    accum(pa, gin);
  });
}

Var block(const Var& a, Eigen::Index r0, Eigen::Index c0, Eigen::Index rows,
          Eigen::Index cols) {
  if (r0 < 0 || c0 < 0 || rows < 0 || cols < 0 || r0 + rows > a.rows() ||
      c0 + cols > a.cols()) {
    std::ostringstream os;
    os << "block: [" << r0 << "," << c0 << ")+(" << rows << "x" << cols
       << ") outside " << shape_str(a);
    throw ShapeError(os.str());
  }
  auto pa = a.shared();
  return make_op(a.value().block(r0, c0, rows, cols), {a},
                 [pa, r0, c0, rows, cols](const Mat& g) {
                   if (!pa->requires_grad) return;
                   ensure_grad(*pa);
                   pa->grad.block(r0, c0, rows, cols) += g;
                 });
}

Var vcat(std::span<const Var> parts) {
  if (parts.empty()) {
    throw ShapeError("vcat: no inputs");
  }
  Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) {
      throw ShapeError("vcat: " + shape_str(parts[0]) + " vs " + shape_str(p));
    }
    rows += p.rows();
  }
  Mat out(rows, cols);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    off += p.rows();
  }
  std::vector<std::shared_ptr<Node>> ps;
  std::vector<Eigen::Index> heights;
  for (const Var& p : parts) {
    ps.push_back(p.shared());
    heights.push_back(p.rows());
  }
  return make_op(std::move(out), parts, [ps, heights](const Mat& g) {
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      accum(ps[i], g.middleRows(off, heights[i]));
      off += heights[i];
    }
  });
}

Var hcat(std::span<const Var> parts) {
  if (parts.empty()) {
    throw ShapeError("hcat: no inputs");
  }
  Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("hcat: " + shape_str(parts[0]) + " vs " + shape_str(p));
    }
    cols += p.cols();
  }
  Mat out(rows, cols);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  std::vector<std::shared_ptr<Node>> ps;
  std::vector<Eigen::Index> widths;
  for (const Var& p : parts) {
    ps.push_back(p.shared());
    widths.push_back(p.cols());
  }
  return make_op(std::move(out), parts, [ps, widths](const Mat& g) {
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      accum(ps[i], g.middleCols(off, widths[i]));
      off += widths[i];
    }
  });
}

namespace {
void check_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": " + shape_str(a) + " vs " +
                     shape_str(b));
  }
}
}  // namespace

Var add(const Var& a, const Var& b) {
  check_same_shape("add", a, b);
  auto pa = a.shared(), pb = b.shared();
  return make_op(a.value() + b.value(), {a, b}, [pa, pb](const Mat& g) {
    accum(pa, g);
    accum(pb, g);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape("sub", a, b);
  auto pa = a.shared(), pb = b.shared();
  return make_op(a.value() - b.value(), {a, b}, [pa, pb](const Mat& g) {
    accum(pa, g);
    accum(pb, -g);
  });
}

Var add_n(std::span<const Var> terms) {
  if (terms.empty()) {
    throw ShapeError("add_n: no inputs");
  }
  Mat out = terms[0].value();
  for (std::size_t i = 1; i < terms.size(); ++i) {
    check_same_shape("add_n", terms[0], terms[i]);
    out += terms[i].value();
  }
  std::vector<std::shared_ptr<Node>> ps;
  for (const Var& t : terms) {
    ps.push_back(t.shared());
  }
  return make_op(std::move(out), terms, [ps](const Mat& g) {
    for (const auto& p : ps) {
      accum(p, g);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape("mul", a, b);
  auto pa = a.shared(), pb = b.shared();
  return make_op(a.value().cwiseProduct(b.value()), {a, b},
                 [pa, pb](const Mat& g) {
                   accum(pa, g.cwiseProduct(pb->value));
                   accum(pb, g.cwiseProduct(pa->value));
                 });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a) + " vs " + shape_str(b));
  }
  auto pa = a.shared(), pb = b.shared();
  return make_op(a.value() * b.value(), {a, b}, [pa, pb](const Mat& g) {
    accum(pa, g * pb->value.transpose());
    accum(pb, pa->value.transpose() * g);
  });
}

Var scale(const Var& a, double c) {
  auto pa = a.shared();
  return make_op(a.value() * c, {a},
                 [pa, c](const Mat& g) { accum(pa, g * c); });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var smul(const Var& s, const Var& a) {
  if (s.rows() != 1 || s.cols() != 1) {
    throw ShapeError("smul: scalar arg is " + shape_str(s));
  }
  auto ps = s.shared(), pa = a.shared();
  return make_op(s.value()(0, 0) * a.value(), {s, a}, [ps, pa](const Mat& g) {
    accum(ps, Mat::Constant(1, 1, g.cwiseProduct(pa->value).sum()));
    accum(pa, g * ps->value(0, 0));
  });
}

Var add_col_broadcast(const Var& m, const Var& col) {
  if (col.cols() != 1 || col.rows() != m.rows()) {
    throw ShapeError("add_col_broadcast: " + shape_str(m) + " vs " +
                     shape_str(col));
  }
  auto pm = m.shared(), pc = col.shared();
  Mat out = m.value();
  out.colwise() += col.value().col(0);
  return make_op(std::move(out), {m, col}, [pm, pc](const Mat& g) {
    accum(pm, g);
    accum(pc, g.rowwise().sum());
  });
}

Var sum_all(const Var& a) {
  auto pa = a.shared();
  Eigen::Index r = a.rows(), c = a.cols();
  return make_op(Mat::Constant(1, 1, a.value().sum()), {a},
                 [pa, r, c](const Mat& g) {
                   accum(pa, Mat::Constant(r, c, g(0, 0)));
                 });
}

Var mean_cols(const Var& a) {
  if (a.cols() < 1) {
    throw ShapeError("mean_cols: " + shape_str(a));
  }
  auto pa = a.shared();
  Eigen::Index n = a.cols();
  return make_op(a.value().rowwise().mean(), {a}, [pa, n](const Mat& g) {
    accum(pa, g.replicate(1, n) / static_cast<double>(n));
  });
}

Var logsumexp(const Var& a) {
  auto pa = a.shared();
  if (a.cols() == 1) {
    double m = a.value().maxCoeff();
    double s = (a.value().array() - m).exp().sum();
    double out = m + std::log(s);
    Mat soft = (a.value().array() - out).exp().matrix();
    return make_op(Mat::Constant(1, 1, out), {a}, [pa, soft](const Mat& g) {
      accum(pa, soft * g(0, 0));
    });
  }
  Eigen::Index r = a.rows();
  Mat out(r, 1);
  Mat soft(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < r; ++i) {
    double m = a.value().row(i).maxCoeff();
    double s = (a.value().row(i).array() - m).exp().sum();
    out(i, 0) = m + std::log(s);
    soft.row(i) = (a.value().row(i).array() - out(i, 0)).exp();
  }
  return make_op(std::move(out), {a}, [pa, soft](const Mat& g) {
    accum(pa, (soft.array().colwise() * g.col(0).array()).matrix());
  });
}

Var softmax(const Var& a) {
  auto pa = a.shared();
  if (a.cols() == 1) {
    double m = a.value().maxCoeff();
    Mat y = (a.value().array() - m).exp().matrix();
    y /= y.sum();
    return make_op(Mat(y), {a}, [pa, y](const Mat& g) {
      double dot = g.cwiseProduct(y).sum();
      accum(pa, y.cwiseProduct(g - Mat::Constant(g.rows(), g.cols(), dot)));
    });
  }
  Mat y(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double m = a.value().row(i).maxCoeff();
    Eigen::RowVectorXd e = (a.value().row(i).array() - m).exp().matrix();
    y.row(i) = e / e.sum();
  }
  return make_op(Mat(y), {a}, [pa, y](const Mat& g) {
    Mat gin(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      double dot = g.row(i).cwiseProduct(y.row(i)).sum();
      gin.row(i) = (y.row(i).array() * (g.row(i).array() - dot)).matrix();
    }
    accum(pa, gin);
  });
}

Var sigmoid(const Var& a) {
  Mat s = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  auto pa = a.shared();
  return make_op(Mat(s), {a}, [pa, s](const Mat& g) {
    accum(pa, (g.array() * s.array() * (1.0 - s.array())).matrix());
  });
}

Var tanh(const Var& a) {
  Mat t = a.value().array().tanh().matrix();
  auto pa = a.shared();
  return make_op(Mat(t), {a}, [pa, t](const Mat& g) {
    accum(pa, (g.array() * (1.0 - t.array().square())).matrix());
  });
}

Var relu(const Var& a) {
  auto pa = a.shared();
  return make_op(a.value().cwiseMax(0.0), {a}, [pa](const Mat& g) {
    accum(pa, (pa->value.array() > 0.0).select(g.array(), 0.0).matrix());
  });
}

Var log(const Var& a) {
  auto pa = a.shared();
  return make_op(a.value().array().log().matrix(), {a}, [pa](const Mat& g) {
    accum(pa, (g.array() / pa->value.array()).matrix());
  });
}

Var clamp(const Var& a, double lo, double hi) {
  auto pa = a.shared();
  return make_op(a.value().cwiseMax(lo).cwiseMin(hi), {a},
                 [pa, lo, hi](const Mat& g) {
                   auto interior =
                       (pa->value.array() > lo) && (pa->value.array() < hi);
                   accum(pa, interior.select(g.array(), 0.0).matrix());
                 });
}

Var pick(const Var& a, Eigen::Index r, Eigen::Index c) {
  if (r < 0 || c < 0 || r >= a.rows() || c >= a.cols()) {
    std::ostringstream os;
    os << "pick: (" << r << "," << c << ") outside " << shape_str(a);
    throw ShapeError(os.str());
  }
  auto pa = a.shared();
  return make_op(Mat::Constant(1, 1, a.value()(r, c)), {a},
                 [pa, r, c](const Mat& g) {
                   if (!pa->requires_grad) return;
                   ensure_grad(*pa);
                   pa->grad(r, c) += g(0, 0);
                 });
}

Var lookup_row(const Var& table, Eigen::Index row) {
  if (row < 0 || row >= table.rows()) {
    std::ostringstream os;
    os << "lookup_row: row " << row << " outside " << shape_str(table);
    throw ShapeError(os.str());
  }
  auto pt = table.shared();
  return make_op(table.value().row(row).transpose(), {table},
                 [pt, row](const Mat& g) {
                   if (!pt->requires_grad) return;
                   ensure_grad(*pt);
                   pt->grad.row(row) += g.transpose();
                 });
}

Var dropout(const Var& a, double rate, RngStream& rng, bool train) {
  if (rate < 0.0 || rate >= 1.0) {
    throw DataError("dropout: rate must be in [0,1)");
  }
  if (!train || rate == 0.0) {
    return a;
  }
  double keep = 1.0 - rate;
  Mat mask(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      mask(r, c) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    }
  }
  auto pa = a.shared();
  return make_op(a.value().cwiseProduct(mask), {a}, [pa, mask](const Mat& g) {
    accum(pa, g.cwiseProduct(mask));
  });
}

Var detach(const Var& a) { return constant(a.value()); }

void backward(const Var& loss) {
  if (!loss.defined()) {
    throw ShapeError("backward: undefined loss");
  }
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + [&] {
      std::ostringstream os;
      os << "(" << loss.rows() << "x" << loss.cols() << ")";
      return os.str();
    }());
  }
  Node* root = loss.node();
  if (!root->requires_grad) {
    return;  // no parameters upstream, nothing to accumulate
  }

  // Post-order over the subgraph that needs gradients.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.push_back({root, 0});
  visited.insert(root);
  while (!stack.empty()) {
    Node* n = stack.back().first;
    std::size_t i = stack.back().second;
    if (i < n->parents.size()) {
      ++stack.back().second;
      Node* p = n->parents[i].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  // Interior gradients are per-call scratch; only leaves (parameters)
  // accumulate across calls.
  for (Node* n : order) {
    if (n->backprop) {
      n->grad.resize(0, 0);
    }
  }
  ensure_grad(*root);
  root->grad(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->has_grad()) {
      n->backprop(n->grad);
    }
  }
}

}  // namespace docner
