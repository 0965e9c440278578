#include "docner/xsent.hpp"

namespace docner {

CrossSentence CrossSentence::create(ParamRegistry& reg,
                                    Eigen::Index input_size,
                                    Eigen::Index hidden_per_dir, int window,
                                    RngStream& rng) {
  CrossSentence m;
  m.window = window;
  m.dim = 2 * hidden_per_dir;
  m.enc_cur = BiLstm::create(reg, "sent.cur", input_size, hidden_per_dir, rng);
  m.enc_past = BiLstm::create(reg, "sent.past", input_size, hidden_per_dir, rng);
  m.enc_fut = BiLstm::create(reg, "sent.fut", input_size, hidden_per_dir, rng);
  m.W_cur = reg.add_glorot("sent.att.W_cur", m.dim, m.dim, rng);
  m.W_ctx = reg.add_glorot("sent.att.W_ctx", m.dim, m.dim, rng);
  m.w_att = reg.add_glorot("sent.att.w", 1, m.dim, rng);
  m.b_att = reg.add_zeros("sent.att.b", m.dim, 1);
  m.W_g1 = reg.add_glorot("sent.gate.W_ctx", m.dim, m.dim, rng);
  m.W_g2 = reg.add_glorot("sent.gate.W_cur", m.dim, m.dim, rng);
  m.W_g3 = reg.add_glorot("sent.gate.W_out", m.dim, m.dim, rng);
  return m;
}

Var CrossSentence::pool(const BiLstm& enc, std::span<const Var> tokens) const {
  if (tokens.empty()) {
    return constant(Mat::Zero(dim, 1));
  }
  std::vector<Var> hs = enc.run(tokens);
  return mean_cols(hcat(std::span<const Var>(hs.data(), hs.size())));
}

Var CrossSentence::compatibility(const Var& s_cur, const Var& s_ctx) const {
  Var t = tanh(add(add(matmul(W_cur, s_cur), matmul(W_ctx, s_ctx)), b_att));
  return matmul(w_att, t);
}

CrossSentence::Fusion CrossSentence::fuse_sentence(
    const std::vector<std::vector<Var>>& sent_tokens, int idx) const {
  int n = static_cast<int>(sent_tokens.size());

  auto window_tokens = [&](int lo, int hi) {
    std::vector<Var> tokens;
    for (int s = lo; s <= hi; ++s) {
      if (s < 0 || s >= n || s == idx) {
        continue;
      }
      tokens.insert(tokens.end(), sent_tokens[s].begin(),
                    sent_tokens[s].end());
    }
    return tokens;
  };

  Fusion f;
  f.s_cur = pool(enc_cur, sent_tokens[idx]);
  std::vector<Var> past = window_tokens(idx - window, idx - 1);
  std::vector<Var> fut = window_tokens(idx + 1, idx + window);
  f.s_past = pool(enc_past, past);
  f.s_fut = pool(enc_fut, fut);

  Var scores = vcat({compatibility(f.s_cur, f.s_past),
                     compatibility(f.s_cur, f.s_fut)});
  f.attention = softmax(scores);
  f.s_ctx = add(smul(block(f.attention, 0, 0, 1, 1), f.s_past),
                smul(block(f.attention, 1, 0, 1, 1), f.s_fut));

  f.gate = sigmoid(
      matmul(W_g3, tanh(add(matmul(W_g1, f.s_ctx), matmul(W_g2, f.s_cur)))));
  Var ones = constant(Mat::Ones(dim, 1));
  f.fused = add(mul(f.gate, f.s_cur), mul(sub(ones, f.gate), f.s_ctx));
  return f;
}

}  // namespace docner
