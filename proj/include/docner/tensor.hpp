#pragma once

#include <Eigen/Dense>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

#include "docner/error.hpp"
#include "docner/rng.hpp"

namespace docner {

using Mat = Eigen::MatrixXd;

// One node of a reverse-mode computation graph. Nodes are heap-allocated by
// the op functions below and reclaimed when the last Var handle drops, so a
// graph lives exactly as long as someone holds its root.
struct Node {
  Mat value;
  Mat grad;  // lazily sized on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Receives d(loss)/d(value) and adds the chain-rule contribution into each
  // parent's grad. Empty for leaves.
  std::function<void(const Mat&)> backprop;

  bool has_grad() const { return grad.size() > 0; }
};

// Value-semantics handle to a node. Copying a Var aliases the node.
class Var {
 public:
  Var() = default;
  explicit Var(Mat value, bool requires_grad = false)
      : n_(std::make_shared<Node>()) {
    n_->value = std::move(value);
    n_->requires_grad = requires_grad;
  }
  explicit Var(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  bool defined() const { return static_cast<bool>(n_); }
  Eigen::Index rows() const { return n_->value.rows(); }
  Eigen::Index cols() const { return n_->value.cols(); }
  Eigen::Index size() const { return n_->value.size(); }

  const Mat& value() const { return n_->value; }
  Mat& value() { return n_->value; }

  bool requires_grad() const { return n_->requires_grad; }

  // Accumulated gradient; zero-shaped matrix until backward reaches the node.
  const Mat& grad() const { return n_->grad; }
  Mat& grad() { return n_->grad; }
  void clear_grad() { n_->grad.resize(0, 0); }

  Node* node() const { return n_.get(); }
  const std::shared_ptr<Node>& shared() const { return n_; }

 private:
  std::shared_ptr<Node> n_;
};

// ---- construction ----

inline Var constant(Mat m) { return Var(std::move(m), false); }
inline Var constant(double v) { return Var(Mat::Constant(1, 1, v), false); }
inline Var leaf(Mat m) { return Var(std::move(m), true); }

// Uniform in +/- sqrt(6 / (fan_in + fan_out)), the usual fan-based scheme
// for weight matrices mapping cols -> rows.
Mat glorot_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng);

// ---- shape and structure ----

Var transpose(const Var& a);
// Row-major reflow to (rows, cols); element count must match.
Var reshape_rowmajor(const Var& a, Eigen::Index rows, Eigen::Index cols);
Var block(const Var& a, Eigen::Index r0, Eigen::Index c0, Eigen::Index rows,
          Eigen::Index cols);
Var vcat(std::span<const Var> parts);
Var hcat(std::span<const Var> parts);
inline Var vcat(std::initializer_list<Var> parts) {
  return vcat(std::span<const Var>(parts.begin(), parts.size()));
}
inline Var hcat(std::initializer_list<Var> parts) {
  return hcat(std::span<const Var>(parts.begin(), parts.size()));
}

// ---- arithmetic ----

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var add_n(std::span<const Var> terms);  // same-shape n-ary sum
Var mul(const Var& a, const Var& b);    // elementwise
Var matmul(const Var& a, const Var& b);
Var scale(const Var& a, double c);
Var neg(const Var& a);
// 1x1 scalar times tensor, gradients to both.
Var smul(const Var& s, const Var& a);
// m plus column vector broadcast across columns.
Var add_col_broadcast(const Var& m, const Var& col);

// ---- reductions ----

Var sum_all(const Var& a);   // 1x1
Var mean_cols(const Var& a); // column vector of row means (mean over axis 1)
// Column vector: log sum exp over entries, 1x1. Otherwise: per-row, column
// vector result. Max-shifted.
Var logsumexp(const Var& a);
// Column vector: one distribution. Otherwise: row-wise distributions.
Var softmax(const Var& a);

// ---- elementwise nonlinearities ----

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var log(const Var& a);
// Clamp to [lo, hi]; gradient passes only where the input was interior.
Var clamp(const Var& a, double lo, double hi);

// ---- indexing ----

Var pick(const Var& a, Eigen::Index r, Eigen::Index c);  // 1x1
// Row of a table as a column vector; gradient accumulates into that row.
Var lookup_row(const Var& table, Eigen::Index row);

// ---- stochastic / structural ----

// Inverted dropout: kept entries scaled by 1/(1-rate). Identity (the same
// handle) when train is false or rate is 0.
Var dropout(const Var& a, double rate, RngStream& rng, bool train);
// Value copy with no history; gradients stop here.
Var detach(const Var& a);

// Reverse pass from a 1x1 loss. Leaf gradients accumulate across calls;
// interior gradients are rebuilt per call.
void backward(const Var& loss);

}  // namespace docner
