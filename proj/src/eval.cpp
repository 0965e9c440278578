#include "docner/eval.hpp"

#include <algorithm>

#include "docner/error.hpp"

namespace docner {

void accumulate_sentence(EvalResult& result,
                         const std::vector<std::string>& gold,
                         const std::vector<std::string>& pred) {
  if (gold.size() != pred.size()) {
    throw DataError("evaluate: sentence length mismatch, gold " +
                    std::to_string(gold.size()) + " vs predicted " +
                    std::to_string(pred.size()));
  }
  std::vector<Span> gs = spans_of(gold);
  std::vector<Span> ps = spans_of(pred);
  std::sort(gs.begin(), gs.end());
  std::sort(ps.begin(), ps.end());

  result.overall.gold += gs.size();
  result.overall.predicted += ps.size();
  for (const Span& s : gs) {
    result.by_type[s.type].gold += 1;
  }
  for (const Span& s : ps) {
    result.by_type[s.type].predicted += 1;
  }
  std::size_t i = 0, j = 0;
  while (i < gs.size() && j < ps.size()) {
    if (gs[i] == ps[j]) {
      result.overall.correct += 1;
      result.by_type[gs[i].type].correct += 1;
      ++i;
      ++j;
    } else if (gs[i] < ps[j]) {
      ++i;
    } else {
      ++j;
    }
  }
}

EvalResult evaluate_tags(const std::vector<std::vector<std::string>>& gold,
                         const std::vector<std::vector<std::string>>& pred) {
  if (gold.size() != pred.size()) {
    throw DataError("evaluate: corpus size mismatch, gold " +
                    std::to_string(gold.size()) + " vs predicted " +
                    std::to_string(pred.size()));
  }
  EvalResult result;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    accumulate_sentence(result, gold[s], pred[s]);
  }
  return result;
}

}  // namespace docner
