#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gapf/kdtree.hpp"
#include "gapf/point_cloud.hpp"
#include "gapf/random.hpp"
#include "gapf/se3.hpp"
#include "gapf/viewgen.hpp"

namespace gapf {

struct Correspondence {
  std::size_t model = 0;        // position in the model cloud
  std::size_t observation = 0;  // position in the observation cloud
  double squared_distance = 0;  // m^2, measured when the pair was formed

  bool operator==(const Correspondence&) const = default;
};

using CorrespondenceSet = std::vector<Correspondence>;

/// Sample-consensus rejection parameters.
struct SacParams {
  double inlier_threshold = 0.02;  // m
  int iterations = 50;

  bool operator==(const SacParams&) const = default;
};

struct IcpParams {
  double max_correspondence_distance = 0.05;  // m
  SacParams sac;
  /// Upper bound on synthetic-view points entering correspondence search
  /// (evenly strided); 0 keeps every visible point.
  std::size_t max_model_points = 0;
  ViewOptions view;

  bool operator==(const IcpParams& o) const {
    return max_correspondence_distance == o.max_correspondence_distance && sac == o.sac &&
           max_model_points == o.max_model_points && view.cull_back_faces == o.view.cull_back_faces;
  }
};

/// Wall-clock seconds spent per stage, accumulated by callers that profile.
struct StageTimes {
  double viewgen = 0;
  double correspondence = 0;
  double least_squares = 0;
  double resample = 0;
  double frame = 0;  // whole filter step

  StageTimes& operator+=(const StageTimes& o) {
    viewgen += o.viewgen;
    correspondence += o.correspondence;
    least_squares += o.least_squares;
    resample += o.resample;
    frame += o.frame;
    return *this;
  }
};

struct AlignmentResult {
  Pose transform;                     // refined viewing pose
  CorrespondenceSet correspondences;  // surviving pairs of the final iteration
  double mse = 0;                     // m^2
  double overlap_scaled_error = 0;    // m^2; +inf when the track was lost
  std::size_t model_points = 0;       // m: synthetic-view points considered
  bool lost_track = false;
  bool degenerate_sample = false;
};

struct RejectionResult {
  CorrespondenceSet inliers;
  bool degenerate_sample = false;  // every drawn triple was collinear; input returned unchanged
};

/// For every model point, the nearest observation point within
/// max_distance. Both clouds must be in the same frame.
CorrespondenceSet find_correspondences(const PointCloud& model, const ObservationIndex& observation,
                                       double max_distance);

/// RANSAC over correspondence triples. Hypotheses map observation points onto
/// model points; the consensus set of the best hypothesis is returned in input
/// order. Sets smaller than 3 pass through unchanged.
RejectionResult reject_correspondences(const CorrespondenceSet& pairs, const PointCloud& model,
                                       const PointCloud& observation, const SacParams& params, Rng& rng);

/// Least-squares rigid T minimizing sum |T * p_obs - p_model|^2 (cross-
/// covariance SVD, det = +1 enforced). Throws Error(kInsufficientSupport)
/// for fewer than 3 pairs or collinear support.
Pose estimate_rigid_transform(const CorrespondenceSet& pairs, const PointCloud& model,
                              const PointCloud& observation);

/// (1/n) sum |R * p_obs + t - p_model|^2. Throws Error(kEmptyCorrespondences).
double mean_squared_error(const CorrespondenceSet& pairs, const Pose& transform, const PointCloud& model,
                          const PointCloud& observation);

/// (m / n) * mse, the per-particle error score (lower is better). Throws
/// Error(kNoMatches) when n = 0.
double overlap_scaled_error(double mse, std::size_t model_points, std::size_t matches);

/// A few ICP iterations from `initial_view_pose`: the synthetic view is
/// rendered once, then correspondences, rejection and least squares repeat
/// `iterations` times. A lost track (fewer than 3 pairs, or degenerate
/// support) returns the initial pose with an infinite error.
AlignmentResult icp_refine(const ObservationIndex& observation, const SampledModel& model,
                           const Pose& initial_view_pose, const CameraIntrinsics& intrinsics, int iterations,
                           const IcpParams& params, Rng& rng, StageTimes* timing = nullptr);

/// Same as icp_refine on a fixed synthetic view (model-frame points with
/// their provenance), skipping the render.
AlignmentResult icp_refine_view(const ObservationIndex& observation, const PointCloud& model_view,
                                const Pose& initial_view_pose, int iterations, const IcpParams& params, Rng& rng,
                                StageTimes* timing = nullptr);

}  // namespace gapf
