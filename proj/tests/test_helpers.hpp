#pragma once

#include <cmath>

#include <Eigen/Core>

#include "gapf/se3.hpp"

namespace gapf::test {

inline double max_abs_diff(const Pose& a, const Pose& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

inline Pose random_pose(Rng& rng, double max_translation = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Vector3d axis(u(rng), u(rng), u(rng));
  while (axis.norm() < 1e-3) axis = Eigen::Vector3d(u(rng), u(rng), u(rng));
  const double angle = M_PI * std::abs(u(rng));
  const Eigen::Vector3d t(u(rng) * max_translation, u(rng) * max_translation, u(rng) * max_translation);
  return Pose(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), t);
}

}  // namespace gapf::test
