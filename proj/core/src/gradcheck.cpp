#include "semiflow/gradcheck.hpp"

#include <cmath>

namespace semiflow {

GradCheckResult grad_check(const LossFn& f, const ParamStore& params,
                           double epsilon) {
  GradMap analytic;
  const double base = f(params, analytic);
  if (!std::isfinite(base)) throw NumericError("grad_check: loss is non-finite");

  GradCheckResult result;
  ParamStore work = params;
  GradMap scratch;
  for (const std::string& name : params.names()) {
    Eigen::MatrixXd& tensor = work.at(name);
    const Eigen::MatrixXd* grad = nullptr;
    auto it = analytic.find(name);
    if (it != analytic.end()) grad = &it->second;
    for (int idx = 0; idx < tensor.size(); ++idx) {
      const double saved = tensor.data()[idx];
      tensor.data()[idx] = saved + epsilon;
      scratch.clear();
      const double up = f(work, scratch);
      tensor.data()[idx] = saved - epsilon;
      scratch.clear();
      const double down = f(work, scratch);
      tensor.data()[idx] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("grad_check: perturbed loss is non-finite");
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = grad ? grad->data()[idx] : 0.0;
      const double rel =
          std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_tensor = name;
        result.worst_index = idx;
      }
    }
  }
  return result;
}

}  // namespace semiflow
