#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "gapf/random.hpp"

namespace gapf {

/// Rigid transform in SE(3), stored as a rotation matrix and a translation.
///
/// A pose doubles as a particle state: the camera viewing pose expressed in
/// the object frame, which is the inverse of the object pose in the camera
/// frame. Rotation drift is bounded by re-orthonormalizing (polar
/// decomposition) every `kReorthonormalizeEvery` compositions, or earlier
/// when the deviation from orthonormality exceeds `kMaxDrift`.
class Pose {
 public:
  static constexpr std::uint32_t kReorthonormalizeEvery = 100;
  static constexpr double kMaxDrift = 1e-7;

  Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Eigen::Vector3d& t) { return Pose(Eigen::Matrix3d::Identity(), t); }
  static Pose from_translation(double x, double y, double z) { return from_translation(Eigen::Vector3d(x, y, z)); }
  static Pose from_rotation(const Eigen::Matrix3d& r) { return Pose(r, Eigen::Vector3d::Zero()); }
  static Pose rot_x(double angle);
  static Pose rot_y(double angle);
  static Pose rot_z(double angle);

  const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  const Eigen::Vector3d& translation() const noexcept { return translation_; }
  std::uint32_t compositions() const noexcept { return compositions_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }
  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return apply(p); }
  Eigen::Matrix4d matrix() const;

  /// Row-major 3x4 [R | t], the layout the point kernels consume.
  std::array<double, 12> to_row_major() const;

 private:
  friend Pose compose(const Pose& a, const Pose& b);
  friend Pose inverse(const Pose& p);

  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
  std::uint32_t compositions_ = 0;
};

/// (tx, ty, tz) in meters, (roll, pitch, yaw) in radians; intrinsic x-y-z,
/// i.e. R = Rx(roll) * Ry(pitch) * Rz(yaw).
struct PoseVector {
  double tx = 0, ty = 0, tz = 0;
  double roll = 0, pitch = 0, yaw = 0;
};

struct PerturbationScale {
  Eigen::Vector3d sigma_translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d sigma_rotation = Eigen::Vector3d::Zero();

  bool is_zero() const { return sigma_translation.isZero(0.0) && sigma_rotation.isZero(0.0); }
  bool is_valid() const { return (sigma_translation.array() >= 0).all() && (sigma_rotation.array() >= 0).all(); }
};

/// Applies b, then a (matrix product a * b).
Pose compose(const Pose& a, const Pose& b);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }
Pose inverse(const Pose& p);

/// Translation blended linearly, rotation along the geodesic at constant
/// angular speed. fraction 0 yields `from`, fraction 1 yields `to`.
Pose interpolate(const Pose& from, const Pose& to, double fraction);

/// Right-multiplies `p` by a random transform: per-axis Gaussian translation
/// and per-axis Gaussian Euler angles, in the pose's local frame.
Pose perturb(const Pose& p, const PerturbationScale& scale, Rng& rng);

Eigen::Matrix3d euler_xyz(double roll, double pitch, double yaw);
/// Inverse of euler_xyz; pitch in [-pi/2, pi/2].
Eigen::Vector3d euler_angles(const Eigen::Matrix3d& r);

/// Camera pose at `eye` whose optical axis (+z) points at `target`, rotated
/// by `roll` radians about that axis. `eye` must differ from `target`.
Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double roll = 0.0);

Pose to_pose(const PoseVector& v);
PoseVector from_pose(const Pose& p);

/// Geodesic rotation angle of `r` in [0, pi].
double rotation_angle(const Eigen::Matrix3d& r);
/// Frobenius norm of R^T R - I.
double orthonormality_drift(const Eigen::Matrix3d& r);
/// Closest rotation matrix (polar decomposition, det = +1).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r);

}  // namespace gapf
