#include "docner/fdcheck.hpp"

#include <cmath>
#include <vector>

namespace docner {

FdReport check_gradients(ParamRegistry& params,
                         const std::function<Var()>& loss_fn, double h,
                         const std::function<bool(const std::string&)>&
                             filter) {
  params.zero_grad();
  Var loss = loss_fn();
  backward(loss);

  std::vector<Mat> analytic;
  analytic.reserve(params.count());
  for (const auto& p : params.all()) {
    analytic.push_back(p.var.grad().size() > 0
                           ? p.var.grad()
                           : Mat::Zero(p.var.rows(), p.var.cols()));
  }

  FdReport rep;
  std::size_t pi = 0;
  for (const auto& p : params.all()) {
    if (filter && !filter(p.name)) {
      ++pi;
      continue;
    }
    Var v = p.var;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      for (Eigen::Index c = 0; c < v.cols(); ++c) {
        double orig = v.value()(r, c);
        v.value()(r, c) = orig + h;
        double up = loss_fn().value()(0, 0);
        v.value()(r, c) = orig - h;
        double down = loss_fn().value()(0, 0);
        v.value()(r, c) = orig;

        double numeric = (up - down) / (2.0 * h);
        double a = analytic[pi](r, c);
        double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
        ++rep.checked;
        if (rel > rep.max_rel_err) {
          rep.max_rel_err = rel;
          rep.worst_param = p.name;
          rep.worst_row = r;
          rep.worst_col = c;
          rep.analytic = a;
          rep.numeric = numeric;
        }
      }
    }
    ++pi;
  }
  return rep;
}

}  // namespace docner
