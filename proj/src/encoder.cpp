#include "docner/encoder.hpp"

#include "docner/error.hpp"

namespace docner {

CharEncoder CharEncoder::create(ParamRegistry& reg, Eigen::Index num_chars,
                                Eigen::Index char_dim,
                                Eigen::Index hidden_per_dir, RngStream& rng) {
  CharEncoder e;
  e.table = reg.add("chars.table", glorot_matrix(num_chars, char_dim, rng));
  e.lstm = BiLstm::create(reg, "chars", char_dim, hidden_per_dir, rng);
  return e;
}

Var CharEncoder::encode(std::span<const int> char_ids) const {
  if (char_ids.empty()) {
    throw DataError("char encoder: empty token");
  }
  std::vector<Var> embs;
  embs.reserve(char_ids.size());
  for (int id : char_ids) {
    embs.push_back(lookup_row(table, id));
  }
  return lstm.final_summary(embs);
}

WordEncoder WordEncoder::create(ParamRegistry& reg, Eigen::Index input_size,
                                Eigen::Index hidden_per_dir,
                                double dropout_rate, RngStream& rng) {
  WordEncoder e;
  e.lstm = BiLstm::create(reg, "words", input_size, hidden_per_dir, rng);
  e.dropout_rate = dropout_rate;
  return e;
}

std::vector<Var> WordEncoder::encode_sentence(std::span<const Var> xs,
                                              bool train,
                                              RngStream& dropout_rng) const {
  std::vector<Var> dropped;
  dropped.reserve(xs.size());
  for (const Var& x : xs) {
    dropped.push_back(dropout(x, dropout_rate, dropout_rng, train));
  }
  std::vector<Var> hs = lstm.run(dropped);
  for (Var& h : hs) {
    h = dropout(h, dropout_rate, dropout_rng, train);
  }
  return hs;
}

}  // namespace docner
