#include "gapf/simharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "gapf/error.hpp"

namespace gapf {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

AxisStat axis_stat(const std::vector<double>& values) {
  AxisStat s;
  if (values.empty()) return s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  for (double v : values) s.max_deviation = std::max(s.max_deviation, std::abs(v - s.mean));
  return s;
}

}  // namespace

PointCloud synthesize_observation(const SampledModel& model, const Pose& true_view_pose,
                                  const CameraIntrinsics& intrinsics, const SensorModel& sensor, Rng& rng,
                                  const ViewOptions& options) {
  PointCloud view = generate_view(model, true_view_pose, intrinsics, options);
  if (sensor.depth_noise_sigma == 0.0 && sensor.dropout_probability == 0.0 && sensor.quantization == 0.0) {
    return view;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  PointCloud out;
  out.reserve(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) {
    const double drop = unit(rng);
    const double noise = normal(rng) * sensor.depth_noise_sigma;
    if (drop < sensor.dropout_probability) continue;
    const Eigen::Vector3d& p = view.points[i];
    double depth = p.z() + noise;
    if (sensor.quantization > 0.0) depth = std::round(depth / sensor.quantization) * sensor.quantization;
    if (!(depth > 0.0)) continue;
    out.push_back(p * (depth / p.z()), view.indices[i]);
  }
  return out;
}

std::vector<Pose> build_approach_trajectory(const Pose& start, const Pose& end, std::size_t frames) {
  if (frames < 2) throw Error(ErrorCode::kScenario, "trajectory needs at least 2 frames");
  std::vector<Pose> out;
  out.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    out.push_back(interpolate(start, end, static_cast<double>(k) / static_cast<double>(frames - 1)));
  }
  return out;
}

std::vector<Pose> build_waypoint_trajectory(const std::vector<Pose>& waypoints, std::size_t frames) {
  if (waypoints.empty()) throw Error(ErrorCode::kScenario, "trajectory needs at least one waypoint");
  if (frames < 2) throw Error(ErrorCode::kScenario, "trajectory needs at least 2 frames");
  if (waypoints.size() == 1) return std::vector<Pose>(frames, waypoints.front());
  if (waypoints.size() == 2) return build_approach_trajectory(waypoints[0], waypoints[1], frames);
  std::vector<Pose> out;
  out.reserve(frames);
  const double segments = static_cast<double>(waypoints.size() - 1);
  for (std::size_t k = 0; k < frames; ++k) {
    const double s = segments * static_cast<double>(k) / static_cast<double>(frames - 1);
    const auto seg = std::min(static_cast<std::size_t>(s), waypoints.size() - 2);
    out.push_back(interpolate(waypoints[seg], waypoints[seg + 1], s - static_cast<double>(seg)));
  }
  return out;
}

double ellipsoid_volume(const PointCloud& observation) {
  const std::size_t n = observation.size();
  if (n < 4) return 0.0;
  const Eigen::Vector3d mean = centroid(observation);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : observation.points) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(n);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov, Eigen::EigenvaluesOnly);
  double product = 1.0;
  for (int k = 0; k < 3; ++k) product *= 2.0 * std::sqrt(std::max(0.0, solver.eigenvalues()(k)));
  return 4.0 / 3.0 * M_PI * product;
}

FrameMetrics compute_frame_metrics(const Pose& estimate, const Pose& ground_truth, const PointCloud& observation) {
  const Pose error = compose(inverse(ground_truth), estimate);
  FrameMetrics m;
  m.translational_error_mm = error.translation().cwiseAbs() * 1000.0;
  m.rotational_error_deg = euler_angles(error.rotation()).cwiseAbs() * kRadToDeg;
  m.error_norm_mm = m.translational_error_mm.norm();
  m.rotation_angle_deg = rotation_angle(error.rotation()) * kRadToDeg;
  m.viewing_distance_m = mean_distance(observation);
  m.ellipsoid_volume_m3 = ellipsoid_volume(observation);
  m.observation_points = observation.size();
  return m;
}

void Scenario::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::kScenario, what);
  };
  require(mesh_scale > 0.0, "mesh scale must be > 0");
  require(model_samples >= 1 && sensor_samples >= 1, "sample budgets must be >= 1");
  require(intrinsics.is_valid(), "camera intrinsics are invalid");
  require(sensor.is_valid(), "sensor model is invalid");
  require(trajectory.frames >= 2, "trajectory.frames must be >= 2");
  require(!trajectory.waypoints.empty(), "trajectory needs waypoints");
  require(summary.convergence_window >= 1 && summary.converged_window >= 1, "summary windows must be >= 1");
  try {
    filter.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kScenario, e.what());
  }
}

TriangleMesh load_scenario_mesh(const Scenario& scenario) {
  TriangleMesh mesh;
  if (scenario.mesh_path == "builtin:engine_block") {
    mesh = make_engine_block();
  } else if (scenario.mesh_path == "builtin:sphere") {
    mesh = make_icosphere(0.1, 4);
  } else {
    return load_mesh(scenario.mesh_path, scenario.mesh_scale);
  }
  for (auto& v : mesh.vertices) v *= scenario.mesh_scale;
  return mesh;
}

ExperimentSummary summarize(const std::vector<FrameMetrics>& frames, const SummaryParams& params) {
  ExperimentSummary s;
  s.frames = frames.size();
  s.burn_in_frames = std::min(params.burn_in_frames, frames.size());

  std::array<std::vector<double>, 3> t, r;
  std::vector<double> norms, angles;
  for (std::size_t k = s.burn_in_frames; k < frames.size(); ++k) {
    for (int a = 0; a < 3; ++a) {
      t[a].push_back(frames[k].translational_error_mm[a]);
      r[a].push_back(frames[k].rotational_error_deg[a]);
    }
    norms.push_back(frames[k].error_norm_mm);
    angles.push_back(frames[k].rotation_angle_deg);
  }
  for (int a = 0; a < 3; ++a) {
    s.translation_mm[a] = axis_stat(t[a]);
    s.rotation_deg[a] = axis_stat(r[a]);
  }
  s.error_norm_mm = axis_stat(norms);
  s.rotation_angle_deg = axis_stat(angles);

  const std::size_t w = params.convergence_window;
  for (std::size_t k = 0; k + w <= frames.size(); ++k) {
    bool below = true;
    for (std::size_t j = k; j < k + w && below; ++j) below = frames[j].error_norm_mm < params.convergence_threshold_mm;
    if (below) {
      s.convergence_frame = k;
      break;
    }
  }
  if (s.convergence_frame) {
    const std::size_t begin = *s.convergence_frame;
    const std::size_t end = std::min(frames.size(), begin + params.converged_window);
    double sum = 0;
    for (std::size_t k = begin; k < end; ++k) sum += frames[k].error_norm_mm;
    s.converged_mean_mm = sum / static_cast<double>(end - begin);
    for (std::size_t k = end; k < frames.size(); ++k) {
      if (frames[k].error_norm_mm > params.failure_factor * s.converged_mean_mm) {
        s.failure_frame = k;
        s.failure_distance_m = frames[k].viewing_distance_m;
        s.failure_error_mm = frames[k].error_norm_mm;
        break;
      }
    }
  }
  return s;
}

ExperimentResult run_experiment(const Scenario& scenario, std::uint64_t seed, StageTimes* timing,
                                const FrameCallback& on_frame) {
  scenario.validate();
  return run_experiment(scenario, load_scenario_mesh(scenario), seed, timing, on_frame);
}

ExperimentResult run_experiment(const Scenario& scenario, const TriangleMesh& mesh, std::uint64_t seed,
                                StageTimes* timing, const FrameCallback& on_frame) {
  scenario.validate();
  Rng model_rng = make_stream(seed, StreamTag::kModelSampling, 0);
  Rng sensor_sampling_rng = make_stream(seed, StreamTag::kSensorSampling, 0);
  const SampledModel model = sample_mesh(mesh, scenario.model_samples, model_rng);
  const SampledModel sensor_model = sample_mesh(mesh, scenario.sensor_samples, sensor_sampling_rng);

  const auto& traj = scenario.trajectory;
  const std::vector<Pose> cameras = build_waypoint_trajectory(traj.waypoints, traj.frames);

  FilterConfig filter_config = scenario.filter;
  filter_config.intrinsics = scenario.intrinsics;

  ExperimentResult result;
  result.frames.reserve(traj.frames);
  Rng filter_rng = make_stream(seed, StreamTag::kInit, 0);
  std::optional<FilterState> state;
  Pose pending_control;
  for (std::size_t k = 0; k < traj.frames; ++k) {
    const double drift_steps = k > traj.drift_start_frame ? static_cast<double>(k - traj.drift_start_frame) : 0.0;
    const Pose object = Pose::from_translation(traj.object_drift * drift_steps);
    const Pose truth = compose(inverse(object), cameras[k]);
    if (k > 0) pending_control = compose(pending_control, compose(inverse(cameras[k - 1]), cameras[k]));

    Rng sensor_rng = make_stream(seed, StreamTag::kSensor, k);
    const PointCloud observation =
        synthesize_observation(sensor_model, truth, scenario.intrinsics, scenario.sensor, sensor_rng,
                               filter_config.icp.view);
    if (!observation.empty()) {
      if (!state) state = initialize(observation, model.centroid(), filter_config, filter_rng);
      const auto start = std::chrono::steady_clock::now();
      state = step(std::move(*state), observation, pending_control, model, filter_config, filter_rng, timing);
      if (timing) timing->frame += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      pending_control = Pose::identity();
    }

    const Pose estimate = state ? state->map_estimate : truth;
    FrameMetrics metrics = compute_frame_metrics(inverse(estimate), inverse(truth), observation);
    metrics.frame = k;
    if (state) {
      metrics.ess = state->ess;
      metrics.map_weight = state->map_weight;
    }
    result.frames.push_back(metrics);
    if (on_frame) on_frame(metrics);
  }
  result.summary = summarize(result.frames, scenario.summary);
  if (state) result.summary.resample_count = state->resample_count;
  return result;
}

void write_metrics_csv(const std::vector<FrameMetrics>& frames, std::ostream& out) {
  out << "frame,ex_mm,ey_mm,ez_mm,eroll_deg,epitch_deg,eyaw_deg,err_norm_mm,distance_m,ellipsoid_m3,ess,map_weight\n";
  for (const auto& m : frames) {
    out << m.frame;
    for (double v : {m.translational_error_mm.x(), m.translational_error_mm.y(), m.translational_error_mm.z(),
                     m.rotational_error_deg.x(), m.rotational_error_deg.y(), m.rotational_error_deg.z(),
                     m.error_norm_mm, m.viewing_distance_m, m.ellipsoid_volume_m3, m.ess, m.map_weight}) {
      out << ',' << fmt_double(v);
    }
    out << '\n';
  }
}

void write_summary_csv(const ExperimentSummary& s, std::ostream& out) {
  static const char* axes[3] = {"x", "y", "z"};
  static const char* angles[3] = {"roll", "pitch", "yaw"};
  out << "key,value\n";
  out << "frames," << s.frames << '\n';
  out << "burn_in_frames," << s.burn_in_frames << '\n';
  for (int a = 0; a < 3; ++a) {
    out << "e" << axes[a] << "_mm_mean," << fmt_double(s.translation_mm[a].mean) << '\n';
    out << "e" << axes[a] << "_mm_max_dev," << fmt_double(s.translation_mm[a].max_deviation) << '\n';
  }
  for (int a = 0; a < 3; ++a) {
    out << "e" << angles[a] << "_deg_mean," << fmt_double(s.rotation_deg[a].mean) << '\n';
    out << "e" << angles[a] << "_deg_max_dev," << fmt_double(s.rotation_deg[a].max_deviation) << '\n';
  }
  out << "err_norm_mm_mean," << fmt_double(s.error_norm_mm.mean) << '\n';
  out << "err_norm_mm_max_dev," << fmt_double(s.error_norm_mm.max_deviation) << '\n';
  out << "rot_angle_deg_mean," << fmt_double(s.rotation_angle_deg.mean) << '\n';
  out << "rot_angle_deg_max_dev," << fmt_double(s.rotation_angle_deg.max_deviation) << '\n';
  out << "convergence_frame," << (s.convergence_frame ? std::to_string(*s.convergence_frame) : "") << '\n';
  out << "converged_mean_mm," << fmt_double(s.converged_mean_mm) << '\n';
  out << "failure_frame," << (s.failure_frame ? std::to_string(*s.failure_frame) : "") << '\n';
  out << "failure_distance_m," << (s.failure_frame ? fmt_double(s.failure_distance_m) : "") << '\n';
  out << "failure_error_mm," << (s.failure_frame ? fmt_double(s.failure_error_mm) : "") << '\n';
  out << "resample_count," << s.resample_count << '\n';
}

void write_summary_text(const ExperimentSummary& s, std::ostream& out) {
  char line[256];
  out << "frames: " << s.frames << " (burn-in " << s.burn_in_frames << " excluded)\n";
  std::snprintf(line, sizeof(line), "translation error (x, y, z) [mm]: (%.1f+-%.1f, %.1f+-%.1f, %.1f+-%.1f)\n",
                s.translation_mm[0].mean, s.translation_mm[0].max_deviation, s.translation_mm[1].mean,
                s.translation_mm[1].max_deviation, s.translation_mm[2].mean, s.translation_mm[2].max_deviation);
  out << line;
  std::snprintf(line, sizeof(line), "rotation error (roll, pitch, yaw) [deg]: (%.1f+-%.1f, %.1f+-%.1f, %.1f+-%.1f)\n",
                s.rotation_deg[0].mean, s.rotation_deg[0].max_deviation, s.rotation_deg[1].mean,
                s.rotation_deg[1].max_deviation, s.rotation_deg[2].mean, s.rotation_deg[2].max_deviation);
  out << line;
  std::snprintf(line, sizeof(line), "error norm [mm]: %.2f+-%.2f   rotation angle [deg]: %.2f+-%.2f\n",
                s.error_norm_mm.mean, s.error_norm_mm.max_deviation, s.rotation_angle_deg.mean,
                s.rotation_angle_deg.max_deviation);
  out << line;
  if (s.convergence_frame) {
    std::snprintf(line, sizeof(line), "converged at frame %zu (mean %.2f mm)\n", *s.convergence_frame,
                  s.converged_mean_mm);
  } else {
    std::snprintf(line, sizeof(line), "did not converge\n");
  }
  out << line;
  if (s.failure_frame) {
    std::snprintf(line, sizeof(line), "failure at frame %zu, distance %.3f m, error %.2f mm\n", *s.failure_frame,
                  s.failure_distance_m, s.failure_error_mm);
    out << line;
  }
  out << "resampling events: " << s.resample_count << '\n';
}

}  // namespace gapf
