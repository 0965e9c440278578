#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "docner/tensor.hpp"

namespace docner {

struct Parameter {
  std::string name;
  Var var;
};

// Owns every trainable tensor of a model, in registration order. A name can
// be registered once; lookups are exact.
class ParamRegistry {
 public:
  // init becomes a leaf with requires_grad set.
  Var add(const std::string& name, Mat init);
  Var add_glorot(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                 RngStream& rng);
  Var add_zeros(const std::string& name, Eigen::Index rows, Eigen::Index cols);

  bool has(const std::string& name) const;
  Var get(const std::string& name) const;

  std::span<const Parameter> all() const { return order_; }
  std::size_t count() const { return order_.size(); }
  std::size_t total_elements() const;

  void zero_grad();
  // L2 norm over the concatenation of all gradients; unset grads count as 0.
  double grad_norm() const;
  // Name of the first parameter (registration order) with a NaN/Inf gradient,
  // or empty string.
  std::string first_nonfinite_grad() const;

  // Replace values from a name -> matrix map; shapes must match and every
  // registered parameter must be present.
  void load_values(const std::map<std::string, Mat>& values);

 private:
  std::vector<Parameter> order_;
  std::map<std::string, std::size_t> index_;
};

// Binary checkpoint: magic line, u64 header length, JSON header (metadata
// plus parameter manifest), then raw little-endian doubles in manifest
// order, each matrix row-major.
void save_checkpoint(const std::string& path, const ParamRegistry& params,
                     const nlohmann::json& meta);

struct Checkpoint {
  nlohmann::json meta;
  std::map<std::string, Mat> values;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace docner
