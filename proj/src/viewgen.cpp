#include "gapf/viewgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gapf/error.hpp"
#include "gapf/kernels/kernels.hpp"

namespace gapf {

SampledModel::SampledModel(std::vector<Eigen::Vector3d> points, std::vector<Eigen::Vector3d> normals,
                           std::vector<std::uint32_t> source_face)
    : source_face_(std::move(source_face)) {
  const std::size_t n = points.size();
  x_.resize(n);
  y_.resize(n);
  z_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x_[i] = points[i].x();
    y_[i] = points[i].y();
    z_[i] = points[i].z();
    centroid_ += points[i];
  }
  if (n > 0) centroid_ /= static_cast<double>(n);
  if (!normals.empty()) {
    nx_.resize(n);
    ny_.resize(n);
    nz_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      nx_[i] = normals[i].x();
      ny_[i] = normals[i].y();
      nz_[i] = normals[i].z();
    }
  }
  if (source_face_.empty()) source_face_.assign(n, 0);
  cloud_ = PointCloud::from_points(std::move(points));
}

SampledModel sample_mesh(const TriangleMesh& mesh, std::size_t count, Rng& rng) {
  std::vector<double> cumulative;
  std::vector<std::uint32_t> face_ids;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const double area = mesh.face_area(f);
    if (!(area > 0.0) || !std::isfinite(area)) continue;
    total += area;
    cumulative.push_back(total);
    face_ids.push_back(static_cast<std::uint32_t>(f));
  }
  if (face_ids.empty()) throw Error(ErrorCode::kEmptyMesh, "mesh has no face with positive area");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::Vector3d> points(count), normals(count);
  std::vector<std::uint32_t> source(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const std::uint32_t f = face_ids[static_cast<std::size_t>(it - cumulative.begin())];
    const auto& [a, b, c] = mesh.faces[f];
    const double s = std::sqrt(unit(rng));
    const double r = unit(rng);
    points[i] = (1.0 - s) * mesh.vertices[a] + s * (1.0 - r) * mesh.vertices[b] + s * r * mesh.vertices[c];
    normals[i] = mesh.face_normal(f);
    source[i] = f;
  }
  return SampledModel(std::move(points), std::move(normals), std::move(source));
}

std::optional<PixelProjection> project_point(const Eigen::Vector3d& p, const CameraIntrinsics& k) {
  if (!(p.z() > 0.0)) return std::nullopt;
  const double u = std::floor(k.fx * p.x() / p.z() + k.cx);
  const double v = std::floor(k.fy * p.y() / p.z() + k.cy);
  if (!(u >= 0.0 && u < k.width && v >= 0.0 && v < k.height)) return std::nullopt;
  return PixelProjection{static_cast<std::int32_t>(u), static_cast<std::int32_t>(v), p.z()};
}

namespace {

// Per-thread scratch reused across calls; every touched pixel is reset before
// returning so no state leaks between calls.
struct ViewScratch {
  std::vector<double> buffer_depth;
  std::vector<std::int32_t> buffer_index;
  std::vector<std::int32_t> touched;
  std::vector<std::int32_t> pixel;
  std::vector<double> depth;

  void prepare(std::size_t pixels, std::size_t points) {
    if (buffer_depth.size() != pixels) {
      buffer_depth.assign(pixels, std::numeric_limits<double>::infinity());
      buffer_index.assign(pixels, -1);
    }
    pixel.resize(points);
    depth.resize(points);
    touched.clear();
  }
};

}  // namespace

PointCloud generate_view(const SampledModel& model, const Pose& view_pose, const CameraIntrinsics& intrinsics,
                         const ViewOptions& options) {
  PointCloud out;
  const std::size_t n = model.size();
  if (n == 0) return out;

  thread_local ViewScratch scratch;
  scratch.prepare(static_cast<std::size_t>(intrinsics.width) * static_cast<std::size_t>(intrinsics.height), n);

  kernels::ProjectParams params;
  params.rigid = inverse(view_pose).to_row_major();
  params.fx = intrinsics.fx;
  params.fy = intrinsics.fy;
  params.cx = intrinsics.cx;
  params.cy = intrinsics.cy;
  params.near_clip = intrinsics.near_clip;
  params.far_clip = intrinsics.far_clip;
  params.width = intrinsics.width;
  params.height = intrinsics.height;
  params.cull_back_faces = options.cull_back_faces && model.has_normals();

  const kernels::ConstSoa pts{model.xs().data(), model.ys().data(), model.zs().data()};
  const kernels::ConstSoa nrm = params.cull_back_faces
                                    ? kernels::ConstSoa{model.nxs().data(), model.nys().data(), model.nzs().data()}
                                    : kernels::ConstSoa{};
  kernels::active().project_points(params, pts, nrm, n, scratch.pixel.data(), scratch.depth.data());

  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t px = scratch.pixel[i];
    if (px < 0) continue;
    const double d = scratch.depth[i];
    // Strict comparison: on equal depth the lower index (seen first) stays.
    if (d < scratch.buffer_depth[px]) {
      if (scratch.buffer_index[px] < 0) scratch.touched.push_back(px);
      scratch.buffer_depth[px] = d;
      scratch.buffer_index[px] = static_cast<std::int32_t>(i);
    }
  }

  out.reserve(scratch.touched.size());
  const auto& m = params.rigid;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t px = scratch.pixel[i];
    if (px < 0 || scratch.buffer_index[px] != static_cast<std::int32_t>(i)) continue;
    const double x = pts.x[i], y = pts.y[i], z = pts.z[i];
    out.push_back({m[0] * x + m[1] * y + m[2] * z + m[3], m[4] * x + m[5] * y + m[6] * z + m[7],
                   m[8] * x + m[9] * y + m[10] * z + m[11]},
                  static_cast<std::int64_t>(i));
  }
  for (std::int32_t px : scratch.touched) {
    scratch.buffer_depth[px] = std::numeric_limits<double>::infinity();
    scratch.buffer_index[px] = -1;
  }
  return out;
}

}  // namespace gapf
