#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docner/fdcheck.hpp"

namespace docner {

struct OpCheck {
  std::string name;
  FdReport report;
};

// Finite-difference battery over every differentiable primitive, each against
// a freshly built miniature graph. Deterministic fixtures.
std::vector<OpCheck> check_primitive_ops(double h = 1e-4);

struct ModelCheck {
  FdReport report;
  std::uint64_t seed = 0;    // first seed giving a safely separated setup
  double entropy_margin = 0; // threshold distance to the nearest entropy
  double relu_margin = 0;    // smallest |pre-activation| inside aggregation
  int dropped = 0;           // tokens pruned at the picked threshold
  int node_count = 0;
  std::size_t params = 0;
};

// End-to-end check of the full document loss on a two-sentence toy document
// with repeated surfaces, all modules on, dropout 0. The entropy threshold is
// placed in the widest gap below the most uncertain graph node so the drop
// set cannot flip under perturbation; seeds are tried until both that margin
// and the aggregation ReLU inputs are comfortably away from their kinks.
ModelCheck check_toy_model(double h = 1e-4);

}  // namespace docner
