#include "gapf/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "gapf/error.hpp"

namespace gapf {
namespace {

constexpr double kDegToRad = M_PI / 180.0;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

// Reads keys from one [section], remembering which ones were consumed so
// that unknown keys can be reported.
class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  void read(const char* key, double& out) {
    if (const toml::node* n = get(key)) {
      if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) {
        out = *v;
      } else {
        fail(where(key) + " must be a number");
      }
    }
  }

  template <typename Int>
  void read_int(const char* key, Int& out) {
    if (const toml::node* n = get(key)) {
      const auto v = n->value_exact<std::int64_t>();
      if (!v) fail(where(key) + " must be an integer");
      if (*v < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
          static_cast<std::uint64_t>(*v) > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
        fail(where(key) + " is out of range");
      }
      out = static_cast<Int>(*v);
    }
  }

  void read(const char* key, bool& out) {
    if (const toml::node* n = get(key)) {
      const auto v = n->value_exact<bool>();
      if (!v) fail(where(key) + " must be true or false");
      out = *v;
    }
  }

  void read(const char* key, std::string& out) {
    if (const toml::node* n = get(key)) {
      const auto v = n->value_exact<std::string>();
      if (!v) fail(where(key) + " must be a string");
      out = *v;
    }
  }

  void read(const char* key, Eigen::Vector3d& out) {
    if (const toml::node* n = get(key)) out = vector3(*n, where(key));
  }

  void read(const char* key, std::vector<PoseSpec>& out) {
    const toml::node* n = get(key);
    if (!n) return;
    const toml::array* rows = n->as_array();
    if (!rows || rows->empty()) fail(where(key) + " must be a non-empty array of [tx, ty, tz, roll, pitch, yaw]");
    out.clear();
    for (std::size_t i = 0; i < rows->size(); ++i) {
      const std::vector<double> v = numbers(*rows->get(i), where(key) + "[" + std::to_string(i) + "]", 6);
      out.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
    }
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [key, node] : *table_) {
      if (!used_.count(std::string(key.str()))) fail("unknown key " + where(std::string(key.str()).c_str()));
    }
  }

 private:
  const toml::node* get(const char* key) {
    if (!table_) return nullptr;
    used_.insert(key);
    return table_->get(key);
  }

  std::string where(const char* key) const { return name_ + "." + key; }
  std::string where(const std::string& key) const { return name_ + "." + key; }

  static std::vector<double> numbers(const toml::node& node, const std::string& name, std::size_t count) {
    const toml::array* a = node.as_array();
    if (!a || a->size() != count) fail(name + " must be an array of " + std::to_string(count) + " numbers");
    std::vector<double> out;
    for (const toml::node& e : *a) {
      const auto v = e.value<double>();
      if (!v || !(e.is_floating_point() || e.is_integer())) fail(name + " must contain only numbers");
      out.push_back(*v);
    }
    return out;
  }

  static Eigen::Vector3d vector3(const toml::node& node, const std::string& name) {
    if (node.is_array()) {
      const std::vector<double> v = numbers(node, name, 3);
      return {v[0], v[1], v[2]};
    }
    // A single number applies to every axis.
    const auto v = node.value<double>();
    if (!v || !(node.is_floating_point() || node.is_integer())) fail(name + " must be a number or [x, y, z]");
    return Eigen::Vector3d::Constant(*v);
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> used_;
};

toml::array to_array(const Eigen::Vector3d& v) { return toml::array{v.x(), v.y(), v.z()}; }

std::int64_t to_int(std::uint64_t v) {
  if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    fail("value " + std::to_string(v) + " does not fit a TOML integer");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

Pose PoseSpec::to_pose() const {
  return gapf::to_pose(PoseVector{tx, ty, tz, roll_deg * kDegToRad, pitch_deg * kDegToRad, yaw_deg * kDegToRad});
}

Scenario ScenarioConfig::to_scenario() const {
  Scenario s;
  s.mesh_path = mesh_path;
  s.mesh_scale = mesh_scale;
  s.model_samples = model_samples;
  s.sensor_samples = sensor_samples;
  s.intrinsics = camera;
  s.sensor = sensor;
  s.trajectory.frames = frames;
  for (const auto& w : waypoints) s.trajectory.waypoints.push_back(w.to_pose());
  s.trajectory.object_drift = object_drift;
  s.trajectory.drift_start_frame = drift_start;

  FilterConfig& f = s.filter;
  f.particle_count = particles;
  f.diffusion.sigma_translation = diffusion_translation;
  f.diffusion.sigma_rotation = diffusion_rotation_deg * kDegToRad;
  f.icp_iterations = icp_iterations;
  f.ess_threshold_fraction = ess_threshold;
  f.weight_blend = weight_blend;
  f.weight_temperature = weight_temperature;
  f.penalty_factor = penalty_factor;
  f.penalty_floor = penalty_floor;
  f.icp = icp;
  f.intrinsics = camera;
  f.jobs = jobs;
  s.summary = summary;
  return s;
}

void ScenarioConfig::validate() const {
  if (frames < 2) fail("trajectory.frames must be >= 2");
  if (particles < 1) fail("filter.particles must be >= 1");
  if (waypoints.empty()) fail("trajectory.waypoints must not be empty");
  if (jobs < 1) fail("run.jobs must be >= 1");
  if (output_dir.empty()) fail("run.output_dir must not be empty");
  const bool builtin = mesh_path.rfind("builtin:", 0) == 0;
  if (builtin && mesh_path != "builtin:engine_block" && mesh_path != "builtin:sphere") {
    fail("unknown builtin mesh '" + mesh_path + "'");
  }
  try {
    to_scenario().validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (!builtin && !std::filesystem::is_regular_file(mesh_path)) {
    throw Error(ErrorCode::kMeshLoad, "mesh file not found: " + mesh_path);
  }
}

ScenarioConfig parse_config(std::istream& in, const std::string& source_name) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  toml::table root;
  try {
    root = toml::parse(buffer.str(), source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source_name << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
        << e.description();
    fail(msg.str());
  }

  static const std::set<std::string> sections = {"mesh",   "camera", "sensor",  "trajectory", "filter",
                                                 "icp",    "sac",    "summary", "run"};
  for (const auto& [key, node] : root) {
    const std::string name(key.str());
    if (!sections.count(name)) fail("unknown section [" + name + "]");
    if (!node.is_table()) fail("[" + name + "] must be a table");
  }
  auto section = [&](const char* name) { return Section(root[name].as_table(), name); };

  ScenarioConfig c;
  {
    Section s = section("mesh");
    s.read("path", c.mesh_path);
    s.read("scale", c.mesh_scale);
    s.read_int("samples", c.model_samples);
    s.read_int("sensor_samples", c.sensor_samples);
    s.finish();
  }
  {
    Section s = section("camera");
    s.read_int("width", c.camera.width);
    s.read_int("height", c.camera.height);
    s.read("fx", c.camera.fx);
    s.read("fy", c.camera.fy);
    s.read("cx", c.camera.cx);
    s.read("cy", c.camera.cy);
    s.read("near", c.camera.near_clip);
    s.read("far", c.camera.far_clip);
    s.finish();
  }
  {
    Section s = section("sensor");
    s.read("depth_noise_sigma", c.sensor.depth_noise_sigma);
    s.read("dropout", c.sensor.dropout_probability);
    s.read("quantization", c.sensor.quantization);
    s.finish();
  }
  {
    Section s = section("trajectory");
    s.read_int("frames", c.frames);
    s.read("waypoints", c.waypoints);
    s.read("object_drift", c.object_drift);
    s.read_int("drift_start", c.drift_start);
    s.finish();
  }
  {
    Section s = section("filter");
    s.read_int("particles", c.particles);
    s.read("diffusion_translation", c.diffusion_translation);
    s.read("diffusion_rotation_deg", c.diffusion_rotation_deg);
    s.read_int("icp_iterations", c.icp_iterations);
    s.read("ess_threshold", c.ess_threshold);
    s.read("weight_blend", c.weight_blend);
    s.read("weight_temperature", c.weight_temperature);
    s.read("penalty_factor", c.penalty_factor);
    s.read("penalty_floor", c.penalty_floor);
    s.finish();
  }
  {
    Section s = section("icp");
    s.read("max_distance", c.icp.max_correspondence_distance);
    s.read_int("max_model_points", c.icp.max_model_points);
    s.read("cull_back_faces", c.icp.view.cull_back_faces);
    s.finish();
  }
  {
    Section s = section("sac");
    s.read("inlier_threshold", c.icp.sac.inlier_threshold);
    s.read_int("iterations", c.icp.sac.iterations);
    s.finish();
  }
  {
    Section s = section("summary");
    s.read_int("burn_in", c.summary.burn_in_frames);
    s.read("convergence_threshold_mm", c.summary.convergence_threshold_mm);
    s.read_int("convergence_window", c.summary.convergence_window);
    s.read_int("converged_window", c.summary.converged_window);
    s.read("failure_factor", c.summary.failure_factor);
    s.finish();
  }
  {
    Section s = section("run");
    s.read_int("seed", c.seed);
    s.read("output_dir", c.output_dir);
    s.read_int("jobs", c.jobs);
    s.finish();
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file " + path.string());
  ScenarioConfig c = parse_config(in, path.string());
  if (c.mesh_path.rfind("builtin:", 0) != 0 && std::filesystem::path(c.mesh_path).is_relative()) {
    c.mesh_path = (path.parent_path() / c.mesh_path).lexically_normal().string();
  }
  return c;
}

void write_config(const ScenarioConfig& c, std::ostream& out) {
  toml::array waypoints;
  for (const auto& w : c.waypoints) {
    waypoints.push_back(toml::array{w.tx, w.ty, w.tz, w.roll_deg, w.pitch_deg, w.yaw_deg});
  }
  const toml::table root{
      {"mesh", toml::table{{"path", c.mesh_path},
                           {"scale", c.mesh_scale},
                           {"samples", to_int(c.model_samples)},
                           {"sensor_samples", to_int(c.sensor_samples)}}},
      {"camera", toml::table{{"width", c.camera.width},
                             {"height", c.camera.height},
                             {"fx", c.camera.fx},
                             {"fy", c.camera.fy},
                             {"cx", c.camera.cx},
                             {"cy", c.camera.cy},
                             {"near", c.camera.near_clip},
                             {"far", c.camera.far_clip}}},
      {"sensor", toml::table{{"depth_noise_sigma", c.sensor.depth_noise_sigma},
                             {"dropout", c.sensor.dropout_probability},
                             {"quantization", c.sensor.quantization}}},
      {"trajectory", toml::table{{"frames", to_int(c.frames)},
                                 {"waypoints", waypoints},
                                 {"object_drift", to_array(c.object_drift)},
                                 {"drift_start", to_int(c.drift_start)}}},
      {"filter", toml::table{{"particles", to_int(c.particles)},
                             {"diffusion_translation", to_array(c.diffusion_translation)},
                             {"diffusion_rotation_deg", to_array(c.diffusion_rotation_deg)},
                             {"icp_iterations", c.icp_iterations},
                             {"ess_threshold", c.ess_threshold},
                             {"weight_blend", c.weight_blend},
                             {"weight_temperature", c.weight_temperature},
                             {"penalty_factor", c.penalty_factor},
                             {"penalty_floor", c.penalty_floor}}},
      {"icp", toml::table{{"max_distance", c.icp.max_correspondence_distance},
                          {"max_model_points", to_int(c.icp.max_model_points)},
                          {"cull_back_faces", c.icp.view.cull_back_faces}}},
      {"sac", toml::table{{"inlier_threshold", c.icp.sac.inlier_threshold}, {"iterations", c.icp.sac.iterations}}},
      {"summary", toml::table{{"burn_in", to_int(c.summary.burn_in_frames)},
                              {"convergence_threshold_mm", c.summary.convergence_threshold_mm},
                              {"convergence_window", to_int(c.summary.convergence_window)},
                              {"converged_window", to_int(c.summary.converged_window)},
                              {"failure_factor", c.summary.failure_factor}}},
      {"run", toml::table{{"seed", to_int(c.seed)}, {"output_dir", c.output_dir}, {"jobs", static_cast<std::int64_t>(c.jobs)}}},
  };
  out << root << '\n';
}

}  // namespace gapf
