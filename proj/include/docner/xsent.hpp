#pragma once

#include <span>
#include <vector>

#include "docner/lstm.hpp"
#include "docner/params.hpp"
#include "docner/tensor.hpp"

namespace docner {

// Sentence-context module: each sentence is fused with pooled summaries of
// the previous and following `window` sentences through a two-way attention
// and an elementwise gate.
struct CrossSentence {
  BiLstm enc_cur, enc_past, enc_fut;  // independent encoders
  Var W_cur, W_ctx, w_att, b_att;     // compatibility score
  Var W_g1, W_g2, W_g3;               // gate
  int window = 2;
  Eigen::Index dim = 0;  // pooled vector size

  static CrossSentence create(ParamRegistry& reg, Eigen::Index input_size,
                              Eigen::Index hidden_per_dir, int window,
                              RngStream& rng);

  // Mean-pooled encoder states over a token window; empty window gives the
  // zero vector.
  Var pool(const BiLstm& enc, std::span<const Var> tokens) const;

  // score = w . tanh(W_cur s_cur + W_ctx s_ctx + b)
  Var compatibility(const Var& s_cur, const Var& s_ctx) const;

  struct Fusion {
    Var s_cur, s_past, s_fut;
    Var attention;  // 2x1: past then future weight
    Var s_ctx;      // attention-combined context
    Var gate;       // elementwise, in (0,1)
    Var fused;      // gate*s_cur + (1-gate)*s_ctx
  };
  // sent_tokens holds per-sentence token representations for the whole
  // document; idx picks the sentence being fused.
  Fusion fuse_sentence(const std::vector<std::vector<Var>>& sent_tokens,
                       int idx) const;
};

}  // namespace docner
