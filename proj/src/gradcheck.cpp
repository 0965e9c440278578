#include "docner/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "docner/corpus.hpp"
#include "docner/docgraph.hpp"
#include "docner/error.hpp"
#include "docner/model.hpp"
#include "docner/rng.hpp"

namespace docner {

namespace {

Mat fixture(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
            double lo = -1.5, double hi = 1.5) {
  RngStream rng(seed);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = rng.uniform(lo, hi);
    }
  }
  return m;
}

// Push values off the listed kink points so central differences stay on one
// side of every non-smooth spot.
Mat away_from(Mat m, std::initializer_list<double> points,
              double margin = 0.05) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (double p : points) {
        if (std::abs(m(i, j) - p) < margin) {
          m(i, j) = m(i, j) >= p ? p + margin : p - margin;
        }
      }
    }
  }
  return m;
}

// Non-uniform scalarization so every element's gradient is distinct.
Var weighted(const Var& v, std::uint64_t seed) {
  return sum_all(mul(v, constant(fixture(v.rows(), v.cols(), seed))));
}

using Loss = std::function<Var(ParamRegistry&)>;

OpCheck run_case(const std::string& name,
                 const std::function<void(ParamRegistry&)>& init,
                 const Loss& loss, double h) {
  ParamRegistry reg;
  init(reg);
  FdReport report =
      check_gradients(reg, [&] { return loss(reg); }, h);
  return {name, report};
}

}  // namespace

std::vector<OpCheck> check_primitive_ops(double h) {
  std::vector<OpCheck> out;
  auto run = [&](const std::string& name,
                 const std::function<void(ParamRegistry&)>& init,
                 const Loss& loss) {
    out.push_back(run_case(name, init, loss, h));
  };

  run(
      "add",
      [](ParamRegistry& r) {
        r.add("a", fixture(3, 4, 11));
        r.add("b", fixture(3, 4, 12));
      },
      [](ParamRegistry& r) {
        return weighted(add(r.get("a"), r.get("b")), 101);
      });
  run(
      "sub",
      [](ParamRegistry& r) {
        r.add("a", fixture(3, 4, 13));
        r.add("b", fixture(3, 4, 14));
      },
      [](ParamRegistry& r) {
        return weighted(sub(r.get("a"), r.get("b")), 102);
      });
  run(
      "mul",
      [](ParamRegistry& r) {
        r.add("a", fixture(3, 4, 15));
        r.add("b", fixture(3, 4, 16));
      },
      [](ParamRegistry& r) {
        return weighted(mul(r.get("a"), r.get("b")), 103);
      });
  run(
      "add_n",
      [](ParamRegistry& r) {
        r.add("a", fixture(2, 3, 17));
        r.add("b", fixture(2, 3, 18));
        r.add("c", fixture(2, 3, 19));
      },
      [](ParamRegistry& r) {
        std::vector<Var> terms = {r.get("a"), r.get("b"), r.get("c")};
        return weighted(add_n(terms), 104);
      });
  run(
      "matmul",
      [](ParamRegistry& r) {
        r.add("a", fixture(3, 4, 20));
        r.add("b", fixture(4, 2, 21));
      },
      [](ParamRegistry& r) {
        return weighted(matmul(r.get("a"), r.get("b")), 105);
      });
  run(
      "scale",
      [](ParamRegistry& r) { r.add("a", fixture(3, 3, 22)); },
      [](ParamRegistry& r) { return weighted(scale(r.get("a"), -1.7), 106); });
  run(
      "neg", [](ParamRegistry& r) { r.add("a", fixture(3, 3, 23)); },
      [](ParamRegistry& r) { return weighted(neg(r.get("a")), 107); });
  run(
      "smul",
      [](ParamRegistry& r) {
        r.add("s", fixture(1, 1, 24));
        r.add("a", fixture(2, 3, 25));
      },
      [](ParamRegistry& r) {
        return weighted(smul(r.get("s"), r.get("a")), 108);
      });
  run(
      "add_col_broadcast",
      [](ParamRegistry& r) {
        r.add("m", fixture(3, 4, 26));
        r.add("c", fixture(3, 1, 27));
      },
      [](ParamRegistry& r) {
        return weighted(add_col_broadcast(r.get("m"), r.get("c")), 109);
      });
  run(
      "transpose", [](ParamRegistry& r) { r.add("a", fixture(3, 4, 28)); },
      [](ParamRegistry& r) { return weighted(transpose(r.get("a")), 110); });
  run(
      "reshape_rowmajor",
      [](ParamRegistry& r) { r.add("a", fixture(3, 4, 29)); },
      [](ParamRegistry& r) {
        return weighted(reshape_rowmajor(r.get("a"), 2, 6), 111);
      });
  run(
      "block", [](ParamRegistry& r) { r.add("a", fixture(4, 5, 30)); },
      [](ParamRegistry& r) {
        return weighted(block(r.get("a"), 1, 2, 2, 3), 112);
      });
  run(
      "vcat",
      [](ParamRegistry& r) {
        r.add("a", fixture(2, 3, 31));
        r.add("b", fixture(1, 3, 32));
      },
      [](ParamRegistry& r) {
        return weighted(vcat({r.get("a"), r.get("b")}), 113);
      });
  run(
      "hcat",
      [](ParamRegistry& r) {
        r.add("a", fixture(3, 2, 33));
        r.add("b", fixture(3, 1, 34));
      },
      [](ParamRegistry& r) {
        return weighted(hcat({r.get("a"), r.get("b")}), 114);
      });
  run(
      "sum_all", [](ParamRegistry& r) { r.add("a", fixture(3, 4, 35)); },
      [](ParamRegistry& r) { return sum_all(r.get("a")); });
  run(
      "mean_cols", [](ParamRegistry& r) { r.add("a", fixture(3, 5, 36)); },
      [](ParamRegistry& r) { return weighted(mean_cols(r.get("a")), 115); });
  run(
      "logsumexp_col", [](ParamRegistry& r) { r.add("a", fixture(5, 1, 37)); },
      [](ParamRegistry& r) { return logsumexp(r.get("a")); });
  run(
      "logsumexp_rows", [](ParamRegistry& r) { r.add("a", fixture(3, 4, 38)); },
      [](ParamRegistry& r) { return weighted(logsumexp(r.get("a")), 116); });
  run(
      "softmax_col", [](ParamRegistry& r) { r.add("a", fixture(5, 1, 39)); },
      [](ParamRegistry& r) { return weighted(softmax(r.get("a")), 117); });
  run(
      "softmax_rows", [](ParamRegistry& r) { r.add("a", fixture(3, 4, 40)); },
      [](ParamRegistry& r) { return weighted(softmax(r.get("a")), 118); });
  run(
      "sigmoid", [](ParamRegistry& r) { r.add("a", fixture(3, 3, 41)); },
      [](ParamRegistry& r) { return weighted(sigmoid(r.get("a")), 119); });
  run(
      "tanh", [](ParamRegistry& r) { r.add("a", fixture(3, 3, 42)); },
      [](ParamRegistry& r) { return weighted(tanh(r.get("a")), 120); });
  run(
      "relu",
      [](ParamRegistry& r) { r.add("a", away_from(fixture(3, 4, 43), {0.0})); },
      [](ParamRegistry& r) { return weighted(relu(r.get("a")), 121); });
  run(
      "log",
      [](ParamRegistry& r) { r.add("a", fixture(3, 3, 44, 0.2, 2.0)); },
      [](ParamRegistry& r) { return weighted(log(r.get("a")), 122); });
  run(
      "clamp",
      [](ParamRegistry& r) {
        r.add("a", away_from(fixture(3, 4, 45, -2.0, 2.0), {-1.0, 1.0}));
      },
      [](ParamRegistry& r) {
        return weighted(clamp(r.get("a"), -1.0, 1.0), 123);
      });
  run(
      "pick", [](ParamRegistry& r) { r.add("a", fixture(3, 4, 46)); },
      [](ParamRegistry& r) { return pick(r.get("a"), 1, 2); });
  run(
      "lookup_row", [](ParamRegistry& r) { r.add("t", fixture(5, 4, 47)); },
      [](ParamRegistry& r) {
        return weighted(
            add(lookup_row(r.get("t"), 1), lookup_row(r.get("t"), 3)), 124);
      });
  run(
      "dropout", [](ParamRegistry& r) { r.add("a", fixture(4, 4, 48)); },
      [](ParamRegistry& r) {
        RngStream rng(777);  // same mask sequence on every evaluation
        return weighted(dropout(r.get("a"), 0.5, rng, true), 125);
      });
  run(
      "dense_chain",
      [](ParamRegistry& r) {
        r.add("W", fixture(3, 4, 49));
        r.add("x", fixture(4, 3, 50));
        r.add("b", fixture(3, 1, 51));
      },
      [](ParamRegistry& r) {
        Var pre = add_col_broadcast(matmul(r.get("W"), r.get("x")), r.get("b"));
        return weighted(tanh(pre), 126);
      });
  return out;
}

namespace {

constexpr const char* kToyText =
    "acme S-ORG\n"
    "alpha O\n"
    "beta O\n"
    "gamma O\n"
    "\n"
    "delta O\n"
    "acme S-ORG\n"
    "beta S-PER\n"
    "epsilon O\n";

Config toy_config() {
  Config cfg;
  cfg.word_dim = 5;
  cfg.char_dim = 3;
  cfg.char_hidden = 2;
  cfg.word_hidden = 3;
  cfg.sent_hidden = 2;
  cfg.unc_hidden = 2;
  cfg.dropout = 0.0;
  cfg.unc_dropout = 0.0;
  cfg.window = 2;
  cfg.sample_size = 5;
  cfg.mc_passes = 2;
  return cfg;
}

// Smallest |x| over the pre-activation vectors feeding the aggregation ReLU,
// recomputed numerically from current parameter values.
double relu_input_margin(const Model& model, const DocumentGraph& graph,
                         const std::vector<Var>& H,
                         const std::set<int>& drop) {
  const GraphLayer& layer = model.graph_layer();
  double margin = std::numeric_limits<double>::infinity();
  for (int i : graph.nodes) {
    Mat sum = Mat::Zero(layer.dim, 1);
    int support = 0;
    for (int j : graph.sampled.at(i)) {
      if (drop.count(j)) continue;
      double r = 1.0;
      if (layer.has_classifier) {
        Mat cat(2 * layer.dim, 1);
        cat << H[i].value(), H[j].value();
        double z = (layer.W_c.value() * cat)(0, 0) + layer.b_c.value()(0, 0);
        r = 1.0 / (1.0 + std::exp(-z));
      }
      sum += r * (layer.W_a.value() * H[j].value() + layer.b_a.value());
      ++support;
    }
    if (support == 0) continue;  // zero vector, no kink to cross
    margin = std::min(margin, (sum / support).cwiseAbs().minCoeff());
  }
  return margin;
}

}  // namespace

ModelCheck check_toy_model(double h) {
  Corpus corpus = parse_conll(kToyText, {}, "toy");
  Vocab vocab = Vocab::build(corpus);
  apply_vocab(corpus, vocab);
  const Document& doc = corpus.documents[0];

  Config cfg = toy_config();
  const std::uint64_t seeds[] = {17, 29, 43, 61, 77, 101, 131, 167, 199, 223};
  const double min_entropy_margin = 1e-3;
  const double min_relu_margin = 1e-2;

  for (std::uint64_t seed : seeds) {
    cfg.seed = seed;
    Model model(cfg, vocab);
    // Fresh init leaves the stochastic-pass head near-uniform, with every
    // entropy within ~1e-3 of ln C and no usable gap for a stable threshold.
    // Scaling its dense layer spreads the distributions; gradients have to be
    // exact at this parameter point like any other.
    model.params().get("unc.W").value() *= 25.0;
    std::vector<DocumentGraph> graphs =
        build_graphs(corpus, cfg.sample_size, cfg.seed);
    const DocumentGraph& graph = graphs[0];

    Model::DocResult probe = model.forward_document(doc, graph, 0, true, 0);
    const std::vector<double>& u = probe.uncertainty.entropy;

    double top_node = -std::numeric_limits<double>::infinity();
    for (int i : graph.nodes) top_node = std::max(top_node, u[i]);
    double below = -std::numeric_limits<double>::infinity();
    for (double e : u) {
      if (e < top_node) below = std::max(below, e);
    }
    if (!std::isfinite(below)) continue;
    double entropy_margin = (top_node - below) / 2.0;
    if (entropy_margin < min_entropy_margin) continue;

    ModelCheck check;
    check.seed = seed;
    check.entropy_margin = entropy_margin;
    model.set_threshold(below + entropy_margin);

    Model::DocResult res = model.forward_document(doc, graph, 0, true, 0);
    check.dropped = static_cast<int>(res.uncertainty.drop.size());
    check.node_count = static_cast<int>(graph.nodes.size());
    check.relu_margin = relu_input_margin(model, graph, res.pre_graph,
                                          res.uncertainty.drop);
    if (check.relu_margin < min_relu_margin) continue;

    // The stochastic-pass head reads detached token representations, so its
    // loss term contributes nothing to encoder-side gradients by design.
    // Each parameter is therefore measured against the loss terms whose
    // gradient actually reaches it: everything downstream of the detach
    // against the composite loss, the detached-input producers against the
    // tagging plus edge-classifier losses. The drop set stays fixed under
    // perturbation thanks to the entropy margin above.
    auto upstream = [](const std::string& name) {
      return name == "words.table" || name.starts_with("chars.") ||
             name.starts_with("sent.");
    };
    FdReport downstream_rep = check_gradients(
        model.params(),
        [&] {
          return model.forward_document(doc, graph, 0, true, 0).loss_total;
        },
        h, [&](const std::string& name) { return !upstream(name); });
    FdReport upstream_rep = check_gradients(
        model.params(),
        [&] {
          Model::DocResult r = model.forward_document(doc, graph, 0, true, 0);
          return add(r.loss_main, scale(r.loss_aux, cfg.theta));
        },
        h, upstream);
    check.report =
        downstream_rep.max_rel_err >= upstream_rep.max_rel_err
            ? downstream_rep
            : upstream_rep;
    check.report.checked = downstream_rep.checked + upstream_rep.checked;
    check.params = model.params().total_elements();
    return check;
  }
  throw NumericError(
      "no seed produced a toy setup with safe kink margins");
}

}  // namespace docner
