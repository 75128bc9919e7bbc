#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gapf/filter.hpp"
#include "gapf/mesh.hpp"
#include "gapf/point_cloud.hpp"
#include "gapf/se3.hpp"
#include "gapf/viewgen.hpp"

namespace gapf {

/// Simulated depth sensor applied to the ideal synthetic view.
struct SensorModel {
  double depth_noise_sigma = 0.002;  // m, along the viewing ray
  double dropout_probability = 0.02;
  double quantization = 0.0;  // m; 0 disables

  bool is_valid() const {
    return depth_noise_sigma >= 0 && dropout_probability >= 0 && dropout_probability <= 1 && quantization >= 0;
  }
  bool operator==(const SensorModel&) const = default;
};

/// Per-frame errors of an estimate against ground truth. Poses are object
/// poses (object in camera frame); errors are expressed in the object frame.
struct FrameMetrics {
  std::size_t frame = 0;
  Eigen::Vector3d translational_error_mm = Eigen::Vector3d::Zero();  // |x|, |y|, |z|
  Eigen::Vector3d rotational_error_deg = Eigen::Vector3d::Zero();    // |roll|, |pitch|, |yaw|
  double error_norm_mm = 0;
  double rotation_angle_deg = 0;  // geodesic angle of the error rotation
  double viewing_distance_m = 0;
  double ellipsoid_volume_m3 = 0;
  double ess = 0;
  double map_weight = 0;
  std::size_t observation_points = 0;
};

/// Segmented partial observation: generate_view at the true viewing pose,
/// then per point dropout, Gaussian depth noise along the ray and optional
/// depth quantization.
PointCloud synthesize_observation(const SampledModel& model, const Pose& true_view_pose,
                                  const CameraIntrinsics& intrinsics, const SensorModel& sensor, Rng& rng,
                                  const ViewOptions& options = {});

/// interpolate(start, end, k / (frames - 1)) for k in [0, frames).
std::vector<Pose> build_approach_trajectory(const Pose& start, const Pose& end, std::size_t frames);
/// Piecewise-geodesic path through the waypoints, frames evenly spaced in
/// the waypoint parameter.
std::vector<Pose> build_waypoint_trajectory(const std::vector<Pose>& waypoints, std::size_t frames);

/// (4/3) pi a1 a2 a3 with semi-axes a_i = 2 sqrt(lambda_i) of the point
/// covariance; 0 for fewer than 4 points.
double ellipsoid_volume(const PointCloud& observation);

/// Error transform E = inverse(ground_truth) * estimate on object poses.
FrameMetrics compute_frame_metrics(const Pose& estimate, const Pose& ground_truth, const PointCloud& observation);

struct TrajectorySpec {
  std::vector<Pose> waypoints;  // camera poses in the initial object frame
  std::size_t frames = 100;
  Eigen::Vector3d object_drift = Eigen::Vector3d::Zero();  // m per frame, applied to the object
  std::size_t drift_start_frame = 0;
};

struct SummaryParams {
  std::size_t burn_in_frames = 15;
  double convergence_threshold_mm = 10.0;
  std::size_t convergence_window = 5;  // frames that must stay below the threshold
  std::size_t converged_window = 10;   // frames averaged into the converged mean
  double failure_factor = 3.0;

  bool operator==(const SummaryParams&) const = default;
};

struct Scenario {
  /// File path, or "builtin:engine_block" / "builtin:sphere".
  std::string mesh_path = "builtin:engine_block";
  double mesh_scale = 1.0;
  std::size_t model_samples = 50000;
  std::size_t sensor_samples = 50000;
  CameraIntrinsics intrinsics;
  SensorModel sensor;
  TrajectorySpec trajectory;
  FilterConfig filter;
  SummaryParams summary;

  /// Throws Error(kScenario) on invalid values.
  void validate() const;
};

struct AxisStat {
  double mean = 0;
  double max_deviation = 0;  // max |x - mean|
};

struct ExperimentSummary {
  std::size_t frames = 0;
  std::size_t burn_in_frames = 0;
  std::array<AxisStat, 3> translation_mm{};
  std::array<AxisStat, 3> rotation_deg{};
  AxisStat error_norm_mm;
  AxisStat rotation_angle_deg;
  std::optional<std::size_t> convergence_frame;
  double converged_mean_mm = 0;
  std::optional<std::size_t> failure_frame;
  double failure_distance_m = 0;
  double failure_error_mm = 0;
  std::size_t resample_count = 0;
};

struct ExperimentResult {
  std::vector<FrameMetrics> frames;
  ExperimentSummary summary;
};

/// Resolves builtin meshes or loads the file (Error(kMeshLoad)).
TriangleMesh load_scenario_mesh(const Scenario& scenario);

ExperimentSummary summarize(const std::vector<FrameMetrics>& frames, const SummaryParams& params);

using FrameCallback = std::function<void(const FrameMetrics&)>;

/// Synthesize -> filter step -> metrics for every frame. All randomness is
/// derived from `seed`.
ExperimentResult run_experiment(const Scenario& scenario, std::uint64_t seed, StageTimes* timing = nullptr,
                                const FrameCallback& on_frame = {});
ExperimentResult run_experiment(const Scenario& scenario, const TriangleMesh& mesh, std::uint64_t seed,
                                StageTimes* timing = nullptr, const FrameCallback& on_frame = {});

/// Per-frame CSV with a mandatory header row.
void write_metrics_csv(const std::vector<FrameMetrics>& frames, std::ostream& out);
/// key,value rows.
void write_summary_csv(const ExperimentSummary& summary, std::ostream& out);
void write_summary_text(const ExperimentSummary& summary, std::ostream& out);

}  // namespace gapf
