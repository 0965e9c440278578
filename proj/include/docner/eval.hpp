#pragma once

#include <map>
#include <string>
#include <vector>

#include "docner/tags.hpp"

namespace docner {

struct Prf {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  double precision() const {
    return predicted == 0 ? 0.0 : static_cast<double>(correct) / predicted;
  }
  double recall() const {
    return gold == 0 ? 0.0 : static_cast<double>(correct) / gold;
  }
  double f1() const {
    double p = precision(), r = recall();
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

struct EvalResult {
  Prf overall;                       // micro-averaged
  std::map<std::string, Prf> by_type;
};

// Exact boundary and type match between gold and predicted label sequences,
// one vector of BIOES strings per sentence. Malformed predictions are read
// span-wise (spans_of), never discarded.
EvalResult evaluate_tags(const std::vector<std::vector<std::string>>& gold,
                         const std::vector<std::vector<std::string>>& pred);

// One sentence pair folded into an accumulating result.
void accumulate_sentence(EvalResult& result,
                         const std::vector<std::string>& gold,
                         const std::vector<std::string>& pred);

}  // namespace docner
