#include "docner/uncertainty.hpp"

#include <cmath>

#include "docner/error.hpp"

namespace docner {

double entropy_nats(const Eigen::VectorXd& p) {
  double u = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) {
      u -= p(i) * std::log(p(i));
    }
  }
  return u;
}

UncertaintyModule UncertaintyModule::create(ParamRegistry& reg,
                                            Eigen::Index input_size,
                                            Eigen::Index hidden_per_dir,
                                            int num_tags, double dropout_rate,
                                            RngStream& rng) {
  UncertaintyModule m;
  m.lstm = BiLstm::create(reg, "unc", input_size, hidden_per_dir, rng);
  m.W = reg.add_glorot("unc.W", 2 * hidden_per_dir, num_tags, rng);
  m.dropout_rate = dropout_rate;
  m.num_tags = num_tags;
  return m;
}

UncertaintyModule::SentenceResult UncertaintyModule::mc_predict(
    std::span<const Var> xs, int passes, RngStream& rng) const {
  if (passes < 1) {
    throw DataError("mc_predict: needs at least one pass");
  }
  std::size_t n = xs.size();
  std::vector<std::vector<Var>> per_token(n);
  Var Wt = transpose(W);
  for (int t = 0; t < passes; ++t) {
    std::vector<Var> in;
    in.reserve(n);
    for (const Var& x : xs) {
      in.push_back(dropout(x, dropout_rate, rng, true));
    }
    std::vector<Var> hs = lstm.run(in);
    for (std::size_t i = 0; i < n; ++i) {
      Var h = dropout(hs[i], dropout_rate, rng, true);
      per_token[i].push_back(softmax(matmul(Wt, h)));
    }
  }
  SentenceResult result;
  result.p.reserve(n);
  result.entropy.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Var avg = scale(add_n(per_token[i]), 1.0 / passes);
    result.p.push_back(avg);
    result.entropy.push_back(entropy_nats(avg.value().col(0)));
  }
  return result;
}

Var UncertaintyModule::loss(const SentenceResult& result,
                            std::span<const int> gold) const {
  if (result.p.size() != gold.size()) {
    throw ShapeError("submodule loss: " + std::to_string(result.p.size()) +
                     " predictions vs " + std::to_string(gold.size()) +
                     " tags");
  }
  std::vector<Var> terms;
  terms.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    Var pg = pick(result.p[i], gold[i], 0);
    terms.push_back(log(clamp(pg, 1e-12, 2.0)));  // only the floor can bind
  }
  return neg(add_n(terms));
}

}  // namespace docner
