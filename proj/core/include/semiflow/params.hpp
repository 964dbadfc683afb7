#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "semiflow/errors.hpp"
#include "semiflow/tensor.hpp"

namespace semiflow {

/// Gradients or optimizer moments keyed by parameter name.
using GradMap = std::map<std::string, Eigen::MatrixXd>;

/// Named dense tensors plus free-form metadata. Names are unique; insertion
/// order is preserved so that iteration (and hence optimization and
/// serialization) is deterministic.
class ParamStore {
 public:
  void add(const std::string& name, Eigen::MatrixXd value);
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  const Eigen::MatrixXd& at(const std::string& name) const;
  Eigen::MatrixXd& at(const std::string& name);
  const std::vector<std::string>& names() const { return order_; }
  std::size_t count_scalars() const;

  std::map<std::string, std::string> metadata;

  /// Single-document JSON checkpoint: {metadata, tensors: {name: {shape, data}}},
  /// data row-major at full precision.
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);
  std::string to_json() const;
  static ParamStore from_json(const std::string& text);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Eigen::MatrixXd> index_;
};

/// Per-tape view of a ParamStore: tensors become tracked leaves on first use,
/// and gradients can be harvested by name after a backward pass.
class ParamBinding {
 public:
  ParamBinding(nn::Tape& tape, const ParamStore& store)
      : tape_(&tape), store_(&store) {}

  nn::Var operator()(const std::string& name);

  /// Adds the gradient of every bound tensor into out (allocating as needed).
  void add_grads_to(GradMap& out) const;

 private:
  nn::Tape* tape_;
  const ParamStore* store_;
  std::map<std::string, nn::Var> bound_;
};

double global_norm(const GradMap& grads);
void axpy(GradMap& y, double a, const GradMap& x);  // y += a * x

}  // namespace semiflow
