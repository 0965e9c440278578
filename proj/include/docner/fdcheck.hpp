#pragma once

#include <functional>
#include <string>

#include "docner/params.hpp"

namespace docner {

struct FdReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  Eigen::Index worst_row = -1;
  Eigen::Index worst_col = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Compares reverse-mode gradients of loss_fn against central differences,
// |analytic - numeric| / max(1, |analytic|), perturbing every element of
// every registered parameter (or of the names `filter` accepts). loss_fn
// must rebuild its graph per call and be deterministic in the parameter
// values.
FdReport check_gradients(ParamRegistry& params,
                         const std::function<Var()>& loss_fn, double h = 1e-4,
                         const std::function<bool(const std::string&)>&
                             filter = {});

}  // namespace docner
