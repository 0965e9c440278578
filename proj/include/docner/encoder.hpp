#pragma once

#include <span>
#include <vector>

#include "docner/lstm.hpp"
#include "docner/params.hpp"
#include "docner/tensor.hpp"

namespace docner {

// Character-level token encoder: embedding rows through a small sequence
// model, summarized by its final states from both ends.
struct CharEncoder {
  Var table;  // num_chars x char_dim
  BiLstm lstm;

  static CharEncoder create(ParamRegistry& reg, Eigen::Index num_chars,
                            Eigen::Index char_dim, Eigen::Index hidden_per_dir,
                            RngStream& rng);

  Eigen::Index output_size() const { return lstm.output_size(); }
  Var encode(std::span<const int> char_ids) const;  // throws on empty
};

// Sentence-level context encoder over token representations, dropout on its
// input and output while training.
struct WordEncoder {
  BiLstm lstm;
  double dropout_rate = 0.5;

  static WordEncoder create(ParamRegistry& reg, Eigen::Index input_size,
                            Eigen::Index hidden_per_dir, double dropout_rate,
                            RngStream& rng);

  Eigen::Index output_size() const { return lstm.output_size(); }
  std::vector<Var> encode_sentence(std::span<const Var> xs, bool train,
                                   RngStream& dropout_rng) const;
};

}  // namespace docner
