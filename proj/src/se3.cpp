#include "gapf/se3.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace gapf {

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (orthonormality_drift(rotation_) > kMaxDrift || rotation_.determinant() < 0) {
    rotation_ = orthonormalize(rotation_);
  }
}

Pose Pose::rot_x(double angle) { return from_rotation(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitX()).toRotationMatrix()); }
Pose Pose::rot_y(double angle) { return from_rotation(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitY()).toRotationMatrix()); }
Pose Pose::rot_z(double angle) { return from_rotation(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix()); }

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

std::array<double, 12> Pose::to_row_major() const {
  std::array<double, 12> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r * 4 + c] = rotation_(r, c);
    out[r * 4 + 3] = translation_(r);
  }
  return out;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation_ = a.rotation_ * b.rotation_;
  out.translation_ = a.rotation_ * b.translation_ + a.translation_;
  out.compositions_ = std::max(a.compositions_, b.compositions_) + 1;
  if (out.compositions_ >= Pose::kReorthonormalizeEvery ||
      orthonormality_drift(out.rotation_) > Pose::kMaxDrift) {
    out.rotation_ = orthonormalize(out.rotation_);
    out.compositions_ = 0;
  }
  return out;
}

Pose inverse(const Pose& p) {
  Pose out;
  out.rotation_ = p.rotation_.transpose();
  out.translation_ = -(out.rotation_ * p.translation_);
  out.compositions_ = p.compositions_;
  return out;
}

Pose interpolate(const Pose& from, const Pose& to, double fraction) {
  if (fraction <= 0.0) return from;
  if (fraction >= 1.0) return to;
  const Eigen::Matrix3d relative = from.rotation().transpose() * to.rotation();
  const Eigen::AngleAxisd aa(relative);
  const Eigen::Matrix3d step = Eigen::AngleAxisd(aa.angle() * fraction, aa.axis()).toRotationMatrix();
  const Eigen::Vector3d t = (1.0 - fraction) * from.translation() + fraction * to.translation();
  return Pose(from.rotation() * step, t);
}

Pose perturb(const Pose& p, const PerturbationScale& scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<double, 6> draws{};
  for (double& d : draws) d = normal(rng);
  if (scale.is_zero()) return p;
  const Eigen::Vector3d dt(draws[0] * scale.sigma_translation.x(), draws[1] * scale.sigma_translation.y(),
                           draws[2] * scale.sigma_translation.z());
  const Eigen::Matrix3d dr = euler_xyz(draws[3] * scale.sigma_rotation.x(), draws[4] * scale.sigma_rotation.y(),
                                       draws[5] * scale.sigma_rotation.z());
  return compose(p, Pose(dr, dt));
}

Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double roll) {
  const Eigen::Vector3d z = (target - eye).normalized();
  const Eigen::Vector3d helper = std::abs(z.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d x0 = helper.cross(z).normalized();
  const Eigen::Vector3d y0 = z.cross(x0);
  Eigen::Matrix3d r;
  r.col(0) = std::cos(roll) * x0 + std::sin(roll) * y0;
  r.col(1) = -std::sin(roll) * x0 + std::cos(roll) * y0;
  r.col(2) = z;
  return Pose(r, eye);
}

Eigen::Matrix3d euler_xyz(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

Eigen::Vector3d euler_angles(const Eigen::Matrix3d& r) {
  // R = Rx(a) Ry(b) Rz(c):  r02 = sin b, r12 = -sin a cos b, r22 = cos a cos b,
  //                         r01 = -cos b sin c, r00 = cos b cos c.
  const double sb = std::clamp(r(0, 2), -1.0, 1.0);
  const double pitch = std::asin(sb);
  if (std::abs(sb) > 1.0 - 1e-12) {
    // Gimbal lock: only roll + yaw (or roll - yaw) is observable; put it all in roll.
    const double roll = std::atan2(r(2, 1), r(1, 1));
    return {roll, pitch, 0.0};
  }
  return {std::atan2(-r(1, 2), r(2, 2)), pitch, std::atan2(-r(0, 1), r(0, 0))};
}

Pose to_pose(const PoseVector& v) {
  return Pose(euler_xyz(v.roll, v.pitch, v.yaw), Eigen::Vector3d(v.tx, v.ty, v.tz));
}

PoseVector from_pose(const Pose& p) {
  const Eigen::Vector3d e = euler_angles(p.rotation());
  const Eigen::Vector3d& t = p.translation();
  return {t.x(), t.y(), t.z(), e.x(), e.y(), e.z()};
}

double rotation_angle(const Eigen::Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  if (c > 0.99) {
    // acos is ill-conditioned near zero; use the skew part instead.
    const Eigen::Vector3d w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    return std::asin(std::min(1.0, 0.5 * w.norm()));
  }
  return std::acos(c);
}

double orthonormality_drift(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace gapf
