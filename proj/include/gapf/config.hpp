#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gapf/simharness.hpp"

namespace gapf {

/// Pose as written in scenario files: meters and degrees.
struct PoseSpec {
  double tx = 0, ty = 0, tz = 0;
  double roll_deg = 0, pitch_deg = 0, yaw_deg = 0;

  Pose to_pose() const;
  bool operator==(const PoseSpec&) const = default;
};

/// Scenario files cap the synthetic view entering ICP at 500 points.
inline IcpParams default_icp() {
  IcpParams p;
  p.max_model_points = 500;
  return p;
}

/// A scenario file in its on-disk units. Unlike Scenario it keeps angles in
/// degrees so that writing and re-reading is lossless.
struct ScenarioConfig {
  std::string mesh_path = "builtin:engine_block";
  double mesh_scale = 1.0;
  std::size_t model_samples = 50000;
  std::size_t sensor_samples = 50000;

  CameraIntrinsics camera;
  SensorModel sensor;

  std::size_t frames = 100;
  std::vector<PoseSpec> waypoints{PoseSpec{0, 0, 0.4, 180, 0, 0}};
  Eigen::Vector3d object_drift = Eigen::Vector3d::Zero();
  std::size_t drift_start = 0;

  std::size_t particles = 200;
  Eigen::Vector3d diffusion_translation = Eigen::Vector3d::Constant(0.005);
  Eigen::Vector3d diffusion_rotation_deg = Eigen::Vector3d::Constant(1.0);
  int icp_iterations = 3;
  double ess_threshold = 0.5;
  double weight_blend = 0.5;
  double weight_temperature = FilterConfig{}.weight_temperature;
  double penalty_factor = 10.0;
  double penalty_floor = 1.0;
  IcpParams icp = default_icp();

  SummaryParams summary;

  std::uint64_t seed = 1;
  std::string output_dir = "out";
  unsigned jobs = 1;

  bool operator==(const ScenarioConfig&) const = default;

  /// Runtime form (radians, poses).
  Scenario to_scenario() const;
  /// Throws Error(kConfig) for invalid values and Error(kMeshLoad) naming the
  /// path when a mesh file does not exist.
  void validate() const;
};

/// Parses the TOML scenario format. Relative mesh paths are kept as written.
/// Throws Error(kConfig) with the offending key or source position.
ScenarioConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
/// Reads a file; relative mesh paths are resolved against its directory.
ScenarioConfig load_config(const std::filesystem::path& path);
void write_config(const ScenarioConfig& config, std::ostream& out);

}  // namespace gapf
