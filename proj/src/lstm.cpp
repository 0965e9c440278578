#include "docner/lstm.hpp"

namespace docner {

LstmCell LstmCell::create(ParamRegistry& reg, const std::string& prefix,
                          Eigen::Index input_size, Eigen::Index hidden_size,
                          RngStream& rng) {
  LstmCell c;
  c.input_size = input_size;
  c.hidden_size = hidden_size;
  auto w = [&](const char* gate) {
    return reg.add_glorot(prefix + ".W_" + gate, hidden_size, input_size, rng);
  };
  auto u = [&](const char* gate) {
    return reg.add_glorot(prefix + ".U_" + gate, hidden_size, hidden_size, rng);
  };
  auto b = [&](const char* gate) {
    return reg.add_zeros(prefix + ".b_" + gate, hidden_size, 1);
  };
  c.W_i = w("i"); c.U_i = u("i"); c.b_i = b("i");
  c.W_f = w("f"); c.U_f = u("f"); c.b_f = b("f");
  c.W_o = w("o"); c.U_o = u("o"); c.b_o = b("o");
  c.W_g = w("g"); c.U_g = u("g"); c.b_g = b("g");
  return c;
}

LstmCell::State LstmCell::initial() const {
  return {constant(Mat::Zero(hidden_size, 1)),
          constant(Mat::Zero(hidden_size, 1))};
}

LstmCell::State LstmCell::step(const Var& x, const State& prev,
                               Trace* trace) const {
  Var i = sigmoid(add(add(matmul(W_i, x), matmul(U_i, prev.h)), b_i));
  Var f = sigmoid(add(add(matmul(W_f, x), matmul(U_f, prev.h)), b_f));
  Var o = sigmoid(add(add(matmul(W_o, x), matmul(U_o, prev.h)), b_o));
  Var g = tanh(add(add(matmul(W_g, x), matmul(U_g, prev.h)), b_g));
  Var c = add(mul(f, prev.c), mul(i, g));
  Var h = mul(o, tanh(c));
  if (trace) {
    trace->input_gate = i.value();
    trace->forget_gate = f.value();
    trace->output_gate = o.value();
    trace->candidate = g.value();
  }
  return {h, c};
}

BiLstm BiLstm::create(ParamRegistry& reg, const std::string& prefix,
                      Eigen::Index input_size, Eigen::Index hidden_per_dir,
                      RngStream& rng) {
  BiLstm b;
  b.fwd = LstmCell::create(reg, prefix + ".fwd", input_size, hidden_per_dir, rng);
  b.bwd = LstmCell::create(reg, prefix + ".bwd", input_size, hidden_per_dir, rng);
  return b;
}

std::vector<Var> BiLstm::run_fwd(std::span<const Var> xs) const {
  std::vector<Var> hs;
  hs.reserve(xs.size());
  LstmCell::State st = fwd.initial();
  for (const Var& x : xs) {
    st = fwd.step(x, st);
    hs.push_back(st.h);
  }
  return hs;
}

std::vector<Var> BiLstm::run_bwd(std::span<const Var> xs) const {
  std::vector<Var> hs(xs.size());
  LstmCell::State st = bwd.initial();
  for (std::size_t k = xs.size(); k-- > 0;) {
    st = bwd.step(xs[k], st);
    hs[k] = st.h;
  }
  return hs;
}

std::vector<Var> BiLstm::run(std::span<const Var> xs) const {
  std::vector<Var> f = run_fwd(xs);
  std::vector<Var> b = run_bwd(xs);
  std::vector<Var> out;
  out.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    out.push_back(vcat({f[k], b[k]}));
  }
  return out;
}

Var BiLstm::final_summary(std::span<const Var> xs) const {
  std::vector<Var> f = run_fwd(xs);
  std::vector<Var> b = run_bwd(xs);
  return vcat({f.back(), b.front()});
}

}  // namespace docner
