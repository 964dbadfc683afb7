#include "semiflow/rng.hpp"

#include <cmath>

namespace semiflow {

double CounterRng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Eigen::VectorXd CounterRng::normal_vec(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Eigen::MatrixXd CounterRng::normal_mat(int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = normal();
  return m;
}

Eigen::Vector3d CounterRng::unit_vector() {
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(normal(), normal(), normal());
  } while (v.norm() < 1e-12);
  return v.normalized();
}

Eigen::Vector3d CounterRng::in_unit_ball() {
  const double r = std::cbrt(uniform());
  return r * unit_vector();
}

}  // namespace semiflow
