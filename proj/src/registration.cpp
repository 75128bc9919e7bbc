#include "gapf/registration.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "gapf/error.hpp"
#include "gapf/kernels/kernels.hpp"

namespace gapf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Cross-covariance SVD; returns false when the support has rank < 2.
bool kabsch(const std::vector<Eigen::Vector3d>& src, const std::vector<Eigen::Vector3d>& dst, Pose& out) {
  const std::size_t n = src.size();
  if (n < 3) return false;
  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero(), dst_mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= static_cast<double>(n);
  dst_mean /= static_cast<double>(n);
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) h += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= 1e-12 * s(0)) return false;
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  out = Pose(r, dst_mean - r * src_mean);
  return true;
}

bool collinear(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  return (b - a).cross(c - a).norm() <= 1e-12;
}

// Pairs gathered into structure-of-arrays for the residual kernels.
struct PairArrays {
  std::vector<double> sx, sy, sz, dx, dy, dz;

  PairArrays(const CorrespondenceSet& pairs, const PointCloud& model, const PointCloud& observation) {
    const std::size_t n = pairs.size();
    for (auto* v : {&sx, &sy, &sz, &dx, &dy, &dz}) v->resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d& s = observation.points[pairs[i].observation];
      const Eigen::Vector3d& d = model.points[pairs[i].model];
      sx[i] = s.x();
      sy[i] = s.y();
      sz[i] = s.z();
      dx[i] = d.x();
      dy[i] = d.y();
      dz[i] = d.z();
    }
  }
  kernels::ConstSoa src() const { return {sx.data(), sy.data(), sz.data()}; }
  kernels::ConstSoa dst() const { return {dx.data(), dy.data(), dz.data()}; }
};

}  // namespace

CorrespondenceSet find_correspondences(const PointCloud& model, const ObservationIndex& observation,
                                       double max_distance) {
  CorrespondenceSet out;
  out.reserve(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (auto nn = observation.tree.nearest(model.points[i], max_distance)) {
      out.push_back({i, nn->position, nn->squared_distance});
    }
  }
  return out;
}

RejectionResult reject_correspondences(const CorrespondenceSet& pairs, const PointCloud& model,
                                       const PointCloud& observation, const SacParams& params, Rng& rng) {
  const std::size_t n = pairs.size();
  if (n < 3 || params.iterations <= 0) return {pairs, false};

  const PairArrays arrays(pairs, model, observation);
  const double threshold2 = params.inlier_threshold * params.inlier_threshold;
  const auto& kernels = kernels::active();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::size_t best_count = 0;
  Pose best;
  bool any = false;
  std::vector<Eigen::Vector3d> src(3), dst(3);
  for (int it = 0; it < params.iterations; ++it) {
    std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    while (b == a) b = pick(rng);
    while (c == a || c == b) c = pick(rng);
    for (int k = 0; k < 3; ++k) {
      const auto& p = pairs[k == 0 ? a : (k == 1 ? b : c)];
      src[k] = observation.points[p.observation];
      dst[k] = model.points[p.model];
    }
    if (collinear(src[0], src[1], src[2]) || collinear(dst[0], dst[1], dst[2])) continue;
    Pose hypothesis;
    if (!kabsch(src, dst, hypothesis)) continue;
    const std::size_t count =
        kernels.count_inliers(hypothesis.to_row_major(), arrays.src(), arrays.dst(), n, threshold2, nullptr);
    if (!any || count > best_count) {
      best_count = count;
      best = hypothesis;
      any = true;
    }
    if (best_count == n) break;
  }
  if (!any) return {pairs, true};

  std::vector<std::uint8_t> mask(n);
  kernels.count_inliers(best.to_row_major(), arrays.src(), arrays.dst(), n, threshold2, mask.data());
  RejectionResult out;
  out.inliers.reserve(best_count);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) out.inliers.push_back(pairs[i]);
  }
  return out;
}

Pose estimate_rigid_transform(const CorrespondenceSet& pairs, const PointCloud& model, const PointCloud& observation) {
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kInsufficientSupport,
                "rigid alignment needs at least 3 correspondences, got " + std::to_string(pairs.size()));
  }
  std::vector<Eigen::Vector3d> src, dst;
  src.reserve(pairs.size());
  dst.reserve(pairs.size());
  for (const auto& p : pairs) {
    src.push_back(observation.points[p.observation]);
    dst.push_back(model.points[p.model]);
  }
  Pose out;
  if (!kabsch(src, dst, out)) throw Error(ErrorCode::kInsufficientSupport, "correspondences are collinear");
  return out;
}

double mean_squared_error(const CorrespondenceSet& pairs, const Pose& transform, const PointCloud& model,
                          const PointCloud& observation) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyCorrespondences, "mean squared error of an empty set");
  const PairArrays arrays(pairs, model, observation);
  const double sum =
      kernels::active().sum_squared_residuals(transform.to_row_major(), arrays.src(), arrays.dst(), pairs.size());
  return sum / static_cast<double>(pairs.size());
}

double overlap_scaled_error(double mse, std::size_t model_points, std::size_t matches) {
  if (matches == 0) throw Error(ErrorCode::kNoMatches, "overlap ratio undefined without matches");
  return static_cast<double>(model_points) / static_cast<double>(matches) * mse;
}

AlignmentResult icp_refine_view(const ObservationIndex& observation, const PointCloud& model_view,
                                const Pose& initial_view_pose, int iterations, const IcpParams& params, Rng& rng,
                                StageTimes* timing) {
  AlignmentResult result;
  result.transform = initial_view_pose;
  result.model_points = model_view.size();
  result.overlap_scaled_error = std::numeric_limits<double>::infinity();
  auto lost = [&]() {
    result.transform = initial_view_pose;
    result.correspondences.clear();
    result.mse = std::numeric_limits<double>::infinity();
    result.overlap_scaled_error = std::numeric_limits<double>::infinity();
    result.lost_track = true;
    return result;
  };
  const std::size_t m = model_view.size();
  if (m < 3 || observation.cloud.size() < 3) return lost();

  std::vector<double> mx(m), my(m), mz(m), cx(m), cy(m), cz(m);
  for (std::size_t i = 0; i < m; ++i) {
    mx[i] = model_view.points[i].x();
    my[i] = model_view.points[i].y();
    mz[i] = model_view.points[i].z();
  }
  const auto& kernels = kernels::active();
  Pose current = initial_view_pose;
  CorrespondenceSet pairs;
  pairs.reserve(m);
  for (int it = 0; it < std::max(1, iterations); ++it) {
    auto start = Clock::now();
    // Synthetic view into the camera frame, then model -> observation search.
    kernels.transform_points(inverse(current).to_row_major(), {mx.data(), my.data(), mz.data()},
                             {cx.data(), cy.data(), cz.data()}, m);
    pairs.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (auto nn = observation.tree.nearest({cx[i], cy[i], cz[i]}, params.max_correspondence_distance)) {
        pairs.push_back({i, nn->position, nn->squared_distance});
      }
    }
    if (pairs.size() < 3) return lost();
    RejectionResult kept = reject_correspondences(pairs, model_view, observation.cloud, params.sac, rng);
    result.degenerate_sample = result.degenerate_sample || kept.degenerate_sample;
    if (timing) timing->correspondence += seconds_since(start);
    if (kept.inliers.size() < 3) return lost();

    start = Clock::now();
    Pose next;
    try {
      next = estimate_rigid_transform(kept.inliers, model_view, observation.cloud);
    } catch (const Error&) {
      return lost();
    }
    if (timing) timing->least_squares += seconds_since(start);
    current = next;
    result.correspondences = std::move(kept.inliers);
  }
  result.transform = current;
  result.mse = mean_squared_error(result.correspondences, current, model_view, observation.cloud);
  result.overlap_scaled_error = overlap_scaled_error(result.mse, m, result.correspondences.size());
  return result;
}

AlignmentResult icp_refine(const ObservationIndex& observation, const SampledModel& model,
                           const Pose& initial_view_pose, const CameraIntrinsics& intrinsics, int iterations,
                           const IcpParams& params, Rng& rng, StageTimes* timing) {
  const auto start = Clock::now();
  const PointCloud view = generate_view(model, initial_view_pose, intrinsics, params.view);
  const std::size_t visible = view.size();
  const std::size_t keep =
      params.max_model_points > 0 ? std::min(visible, params.max_model_points) : visible;
  PointCloud model_view;
  model_view.reserve(keep);
  for (std::size_t j = 0; j < keep; ++j) {
    const std::size_t k = keep == visible ? j : j * visible / keep;
    const auto index = view.indices[k];
    model_view.push_back(model.point(static_cast<std::size_t>(index)), index);
  }
  if (timing) timing->viewgen += seconds_since(start);
  return icp_refine_view(observation, model_view, initial_view_pose, iterations, params, rng, timing);
}

}  // namespace gapf
