#pragma once

#include <span>
#include <vector>

#include "docner/params.hpp"
#include "docner/tensor.hpp"

namespace docner {

// Linear-chain CRF over per-token hidden vectors. One weight vector and bias
// per tag pair (y_prev, y), including a synthetic start state for the first
// position; no stop transition. Pair (y_prev, y) lives at row y_prev*C + y
// of W, with y_prev = C meaning start.
struct Crf {
  int num_tags = 0;       // C
  Eigen::Index dim = 0;   // hidden vector size
  Var W;                  // ((C+1)*C) x dim
  Var b;                  // ((C+1)*C) x 1

  static Crf create(ParamRegistry& reg, int num_tags, Eigen::Index dim,
                    RngStream& rng);

  // Pairwise scores at one position: (C+1) x C matrix, entry (y_prev, y) =
  // W_{y_prev,y} . h + b_{y_prev,y}.
  Var scores_at(const Var& h) const;
  Mat scores_value(const Mat& h) const;  // same, outside the graph

  Var sequence_score(std::span<const Var> H, std::span<const int> tags) const;
  Var log_partition(std::span<const Var> H) const;
  // log Z - sequence_score(gold); builds each position's scores once.
  Var nll(std::span<const Var> H, std::span<const int> tags) const;

  // Highest-scoring sequence; ties broken by the lowest tag index at each
  // backpointer and at the final position. Optional additive masks (0 or
  // -inf-like) restrict transitions / final tags.
  std::vector<int> viterbi(std::span<const Var> H) const;
  std::vector<int> viterbi_scores(const std::vector<Mat>& scores,
                                  const Mat* transition_mask = nullptr,
                                  const Eigen::VectorXd* final_mask =
                                      nullptr) const;

  // Shared cores over precomputed per-position score matrices.
  Var score_from(std::span<const Var> scores, std::span<const int> tags) const;
  Var partition_from(std::span<const Var> scores) const;
};

}  // namespace docner
