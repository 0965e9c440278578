#pragma once

#include <span>
#include <string>
#include <vector>

#include "docner/params.hpp"
#include "docner/tensor.hpp"

namespace docner {

// Single-direction LSTM cell. Weight matrices map input/hidden columns to
// gate pre-activations; biases start at zero.
struct LstmCell {
  Var W_i, U_i, b_i;
  Var W_f, U_f, b_f;
  Var W_o, U_o, b_o;
  Var W_g, U_g, b_g;
  Eigen::Index input_size = 0;
  Eigen::Index hidden_size = 0;

  static LstmCell create(ParamRegistry& reg, const std::string& prefix,
                         Eigen::Index input_size, Eigen::Index hidden_size,
                         RngStream& rng);

  struct State {
    Var h, c;
  };
  // Gate values of one step, for inspection.
  struct Trace {
    Mat input_gate, forget_gate, output_gate, candidate;
  };

  State initial() const;
  State step(const Var& x, const State& prev, Trace* trace = nullptr) const;
};

struct BiLstm {
  LstmCell fwd, bwd;

  static BiLstm create(ParamRegistry& reg, const std::string& prefix,
                       Eigen::Index input_size, Eigen::Index hidden_per_dir,
                       RngStream& rng);

  Eigen::Index output_size() const { return 2 * fwd.hidden_size; }

  // Hidden states of one direction over the sequence, in input order.
  std::vector<Var> run_fwd(std::span<const Var> xs) const;
  std::vector<Var> run_bwd(std::span<const Var> xs) const;
  // Concatenated [forward; backward] state per position.
  std::vector<Var> run(std::span<const Var> xs) const;
  // [last forward state; last backward state] - a whole-sequence summary.
  Var final_summary(std::span<const Var> xs) const;
};

}  // namespace docner
