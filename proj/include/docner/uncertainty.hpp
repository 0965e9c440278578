#pragma once

#include <set>
#include <span>
#include <vector>

#include "docner/lstm.hpp"
#include "docner/params.hpp"
#include "docner/tensor.hpp"

namespace docner {

// Per-document summary of the stochastic-pass predictions.
struct UncertaintyReport {
  std::vector<Eigen::VectorXd> p;  // averaged class distribution per token
  std::vector<double> entropy;     // nats, indexed by doc_position
  std::set<int> drop;              // doc_positions with entropy > threshold
  double threshold = 0.5;
  int passes = 0;
};

// -sum p log p with 0 log 0 = 0, in nats.
double entropy_nats(const Eigen::VectorXd& p);

// Small independent tagger (its own sequence model plus a dense layer) run T
// times with dropout active regardless of train/eval; averaged distributions
// estimate per-token confidence. Consumes detached token representations so
// no gradient crosses between it and the main model.
struct UncertaintyModule {
  BiLstm lstm;
  Var W;  // (2*hidden) x C, logits are W'h
  double dropout_rate = 0.5;
  int num_tags = 0;

  static UncertaintyModule create(ParamRegistry& reg, Eigen::Index input_size,
                                  Eigen::Index hidden_per_dir, int num_tags,
                                  double dropout_rate, RngStream& rng);

  struct SentenceResult {
    std::vector<Var> p;            // averaged distribution per token, in-graph
    std::vector<double> entropy;
  };
  // passes >= 1; dropout is drawn from rng per pass, including at eval.
  SentenceResult mc_predict(std::span<const Var> xs, int passes,
                            RngStream& rng) const;

  // Cross-entropy of the averaged distributions against gold tags.
  Var loss(const SentenceResult& result, std::span<const int> gold) const;
};

}  // namespace docner
