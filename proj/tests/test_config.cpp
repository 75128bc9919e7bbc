#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gapf/config.hpp"
#include "gapf/error.hpp"

using namespace gapf;
namespace fs = std::filesystem;

namespace {

ScenarioConfig round_trip(const ScenarioConfig& c) {
  std::stringstream s;
  write_config(c, s);
  return parse_config(s);
}

ErrorCode parse_error_code(const std::string& text, std::string* message = nullptr) {
  std::istringstream in(text);
  try {
    parse_config(in, "test.toml");
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected a config error for: " << text);
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("an empty file yields the defaults") {
  std::istringstream in("");
  const ScenarioConfig c = parse_config(in);
  CHECK(c == ScenarioConfig{});
  CHECK(c.particles == 200);
  CHECK(c.weight_blend == 0.5);
  CHECK(c.ess_threshold == 0.5);
  CHECK(c.icp_iterations == 3);
}

TEST_CASE("defaults round trip") { CHECK(round_trip(ScenarioConfig{}) == ScenarioConfig{}); }

TEST_CASE("randomized configs round trip exactly") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 50; ++i) {
    ScenarioConfig c;
    c.mesh_path = "meshes/part " + std::to_string(i) + ".ply";
    c.mesh_scale = std::abs(u(rng)) + 1e-3;
    c.model_samples = 1 + rng() % 100000;
    c.camera.fx = 100 + std::abs(u(rng));
    c.sensor.depth_noise_sigma = std::abs(u(rng)) * 1e-4;
    c.frames = 2 + rng() % 500;
    c.waypoints.clear();
    for (int k = 0; k < 1 + i % 4; ++k) c.waypoints.push_back({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)});
    c.object_drift = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 1e-3;
    c.diffusion_rotation_deg = Eigen::Vector3d(0.1, 0.2, 1.0 / 3.0);
    c.weight_temperature = std::abs(u(rng)) + 1e-9;
    c.icp.max_correspondence_distance = 0.1 / 3.0;
    c.icp.view.cull_back_faces = i % 2 == 0;
    c.summary.burn_in_frames = rng() % 30;
    c.seed = rng() >> 1;
    c.jobs = 1 + i % 8;
    REQUIRE(round_trip(c) == c);
  }
}

TEST_CASE("shipped scenario files parse, validate and round trip") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(GAPF_DATA_DIR)) {
    if (entry.path().extension() != ".toml") continue;
    ++count;
    const ScenarioConfig c = load_config(entry.path());
    CHECK_NOTHROW(c.validate());
    CHECK(fs::path(c.mesh_path).is_absolute());
    CHECK(round_trip(c) == c);
  }
  CHECK(count >= 4);
}

TEST_CASE("degrees become radians in the runtime scenario") {
  std::istringstream in(
      "[trajectory]\nwaypoints = [[0, 0, 0.4, 90, 0, 0]]\n"
      "[filter]\ndiffusion_rotation_deg = 2\ndiffusion_translation = [0.001, 0.002, 0.003]\n");
  const ScenarioConfig c = parse_config(in);
  const Scenario s = c.to_scenario();
  CHECK(s.filter.diffusion.sigma_rotation.x() == doctest::Approx(2 * M_PI / 180));
  CHECK(s.filter.diffusion.sigma_translation.z() == 0.003);
  const Eigen::Vector3d y = s.trajectory.waypoints[0].rotation() * Eigen::Vector3d::UnitY();
  CHECK((y - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
}

TEST_CASE("errors: unknown names, wrong types and syntax") {
  std::string msg;
  CHECK(parse_error_code("[filter]\nparticle = 3\n", &msg) == ErrorCode::kConfig);
  CHECK(msg.find("filter.particle") != std::string::npos);
  CHECK(parse_error_code("[filters]\n", &msg) == ErrorCode::kConfig);
  CHECK(msg.find("filters") != std::string::npos);
  CHECK(parse_error_code("[filter]\nparticles = \"many\"\n") == ErrorCode::kConfig);
  CHECK(parse_error_code("[filter]\nparticles = 2.5\n") == ErrorCode::kConfig);
  CHECK(parse_error_code("[filter]\nparticles = -1\n") == ErrorCode::kConfig);
  CHECK(parse_error_code("[trajectory]\nwaypoints = [[0, 0, 0.4]]\n") == ErrorCode::kConfig);
  CHECK(parse_error_code("[trajectory]\nwaypoints = []\n") == ErrorCode::kConfig);
  CHECK(parse_error_code("[trajectory]\nobject_drift = [1, 2]\n") == ErrorCode::kConfig);
  CHECK(parse_error_code("[icp]\ncull_back_faces = 1\n") == ErrorCode::kConfig);
  CHECK(parse_error_code("[run]\nseed = 1\n\n[run\n", &msg) == ErrorCode::kConfig);
  CHECK(msg.find("test.toml:4:") != std::string::npos);
}

TEST_CASE("validation") {
  ScenarioConfig c;
  CHECK_NOTHROW(c.validate());
  auto code_of = [](const ScenarioConfig& bad) {
    try {
      bad.validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  c.frames = 1;
  CHECK(code_of(c) == ErrorCode::kConfig);
  c = ScenarioConfig{};
  c.particles = 0;
  CHECK(code_of(c) == ErrorCode::kConfig);
  c = ScenarioConfig{};
  c.weight_blend = 1.0;
  CHECK(code_of(c) == ErrorCode::kConfig);
  c = ScenarioConfig{};
  c.mesh_path = "builtin:teapot";
  CHECK(code_of(c) == ErrorCode::kConfig);
  c = ScenarioConfig{};
  c.mesh_path = "/nonexistent/dir/block.obj";
  CHECK(code_of(c) == ErrorCode::kMeshLoad);
  try {
    c.validate();
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/block.obj") != std::string::npos);
  }
}

TEST_CASE("load_config resolves mesh paths against the config directory") {
  const fs::path dir = fs::temp_directory_path() / "gapf_test_config";
  fs::create_directories(dir / "sub");
  {
    std::ofstream f(dir / "sub" / "scenario.toml");
    f << "[mesh]\npath = \"../mesh.obj\"\n";
  }
  const ScenarioConfig c = load_config(dir / "sub" / "scenario.toml");
  CHECK(fs::path(c.mesh_path) == (dir / "mesh.obj").lexically_normal());
  CHECK_THROWS_AS(load_config(dir / "missing.toml"), Error);
  fs::remove_all(dir);
}
