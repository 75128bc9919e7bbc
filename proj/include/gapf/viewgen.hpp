#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gapf/mesh.hpp"
#include "gapf/point_cloud.hpp"
#include "gapf/random.hpp"
#include "gapf/se3.hpp"

namespace gapf {

/// Pinhole camera without distortion. The depth buffer uses the same
/// resolution; pixels cover [0, width) x [0, height).
struct CameraIntrinsics {
  std::int32_t width = 640;
  std::int32_t height = 480;
  double fx = 525.0;
  double fy = 525.0;
  double cx = 319.5;
  double cy = 239.5;
  double near_clip = 0.02;
  double far_clip = 5.0;

  bool is_valid() const { return width > 0 && height > 0 && near_clip > 0 && near_clip < far_clip && fx > 0 && fy > 0; }
  bool operator==(const CameraIntrinsics&) const = default;
};

/// Surface samples of a mesh, in the model frame. Immutable after
/// construction; shared read-only between threads.
class SampledModel {
 public:
  SampledModel() = default;
  /// `normals` may be empty, which disables back-face culling for this model.
  SampledModel(std::vector<Eigen::Vector3d> points, std::vector<Eigen::Vector3d> normals,
               std::vector<std::uint32_t> source_face);

  std::size_t size() const noexcept { return cloud_.size(); }
  bool empty() const noexcept { return cloud_.empty(); }
  bool has_normals() const noexcept { return !nx_.empty(); }

  const PointCloud& points() const noexcept { return cloud_; }
  const Eigen::Vector3d& point(std::size_t i) const { return cloud_.points[i]; }
  const std::vector<std::uint32_t>& source_face() const noexcept { return source_face_; }
  Eigen::Vector3d normal(std::size_t i) const { return {nx_[i], ny_[i], nz_[i]}; }
  const Eigen::Vector3d& centroid() const noexcept { return centroid_; }

  // Structure-of-arrays copies for the point kernels.
  const std::vector<double>& xs() const noexcept { return x_; }
  const std::vector<double>& ys() const noexcept { return y_; }
  const std::vector<double>& zs() const noexcept { return z_; }
  const std::vector<double>& nxs() const noexcept { return nx_; }
  const std::vector<double>& nys() const noexcept { return ny_; }
  const std::vector<double>& nzs() const noexcept { return nz_; }

 private:
  PointCloud cloud_;
  std::vector<std::uint32_t> source_face_;
  Eigen::Vector3d centroid_ = Eigen::Vector3d::Zero();
  std::vector<double> x_, y_, z_, nx_, ny_, nz_;
};

/// Area-uniform surface sampling: faces are drawn proportionally to their
/// area, points uniformly inside each face. Throws Error(kEmptyMesh) when no
/// face has positive area.
SampledModel sample_mesh(const TriangleMesh& mesh, std::size_t count, Rng& rng);

struct PixelProjection {
  std::int32_t u = 0;
  std::int32_t v = 0;
  double depth = 0;
};

/// pixel = floor(fx*x/z + cx, fy*y/z + cy); nullopt when z <= 0 or the pixel
/// falls outside the image. Does not apply the near/far clip.
std::optional<PixelProjection> project_point(const Eigen::Vector3d& p, const CameraIntrinsics& intrinsics);

struct ViewOptions {
  /// Drop samples whose face normal points away from the camera before the
  /// depth test. Needs consistently oriented (outward) normals.
  bool cull_back_faces = true;
};

/// Visible model points from `view_pose` (camera pose in the model frame),
/// returned in the camera frame with model indices as provenance, ordered by
/// model index. A point is visible when it projects inside the image, lies in
/// [near, far], and has the smallest depth of its pixel (ties go to the lower
/// index). Deterministic and thread-safe.
PointCloud generate_view(const SampledModel& model, const Pose& view_pose, const CameraIntrinsics& intrinsics,
                         const ViewOptions& options = {});

}  // namespace gapf
