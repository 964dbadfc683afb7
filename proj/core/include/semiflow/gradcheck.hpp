#pragma once

#include <functional>
#include <string>

#include "semiflow/params.hpp"

namespace semiflow {

/// A differentiable scalar loss: returns the value and writes analytic
/// parameter gradients into the map.
using LossFn = std::function<double(const ParamStore&, GradMap&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  int worst_index = -1;
};

/// Compares analytic gradients against central differences over every scalar
/// parameter. Relative error uses max(1, |central difference|) as the
/// denominator. Throws NumericError when the loss is non-finite.
GradCheckResult grad_check(const LossFn& f, const ParamStore& params,
                           double epsilon = 1e-5);

}  // namespace semiflow
