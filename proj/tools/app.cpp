#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <vector>

#include <CLI11.hpp>

#include "gapf/config.hpp"
#include "gapf/error.hpp"
#include "gapf/simharness.hpp"
#include "gapf/viewgen.hpp"

namespace gapf::app {
namespace {

namespace fs = std::filesystem;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kScenario: return kExitConfig;
    case ErrorCode::kMeshLoad:
    case ErrorCode::kEmptyMesh: return kExitMesh;
    default: return kExitRuntime;
  }
}

// Runs `body`, turning exceptions into a diagnostic and an exit code.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

std::string output_dir(const std::optional<std::string>& flag, const std::string& configured) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return configured;
}

std::ofstream open_output(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

struct Stat {
  double mean = 0, p50 = 0, p95 = 0;
};

Stat stats(std::vector<double> v) {
  Stat s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  // Nearest-rank percentiles.
  auto rank = [&](double p) {
    const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(k, 1, v.size()) - 1];
  };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  return s;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioConfig config = load_config(options.config);
    if (options.seed) config.seed = *options.seed;
    if (options.jobs) config.jobs = *options.jobs;
    if (options.frames) config.frames = *options.frames;
    config.output_dir = output_dir(options.out, config.output_dir);
    config.validate();

    const ExperimentResult result = run_experiment(config.to_scenario(), config.seed);

    const fs::path dir(config.output_dir);
    {
      std::ofstream f = open_output(dir / "metrics.csv");
      write_metrics_csv(result.frames, f);
    }
    {
      std::ofstream f = open_output(dir / "summary.csv");
      write_summary_csv(result.summary, f);
    }
    {
      std::ofstream f = open_output(dir / "summary.txt");
      write_summary_text(result.summary, f);
    }
    write_summary_text(result.summary, out);
    out << "wrote " << (dir / "metrics.csv").string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_viewgen(const ViewgenOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scenario scenario;
    std::size_t samples = options.samples;
    if (options.config) {
      const ScenarioConfig config = load_config(*options.config);
      scenario.intrinsics = config.camera;
      samples = config.model_samples;
    }
    if (samples < 1) throw Error(ErrorCode::kConfig, "sample count must be >= 1");
    if (!(options.scale > 0)) throw Error(ErrorCode::kConfig, "mesh scale must be > 0");
    scenario.mesh_path = options.mesh;
    scenario.mesh_scale = options.scale;

    const TriangleMesh mesh = load_scenario_mesh(scenario);
    Rng rng = make_stream(options.seed, StreamTag::kModelSampling, 0);
    const SampledModel model = sample_mesh(mesh, samples, rng);
    const auto& p = options.pose;
    const Pose view = to_pose(PoseVector{p[0], p[1], p[2], p[3] * M_PI / 180.0, p[4] * M_PI / 180.0,
                                         p[5] * M_PI / 180.0});

    const auto start = std::chrono::steady_clock::now();
    const PointCloud cloud = generate_view(model, view, scenario.intrinsics);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    std::ofstream f = open_output(options.output);
    write_ply(cloud, f);
    out << "points: " << cloud.size() << '\n';
    char line[64];
    std::snprintf(line, sizeof line, "render_ms: %.3f\n", ms);
    out << line;
    return static_cast<int>(kExitOk);
  });
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioConfig config = load_config(options.config);
    if (options.seed) config.seed = *options.seed;
    if (options.jobs) config.jobs = *options.jobs;
    if (options.particles) config.particles = *options.particles;
    config.frames = options.frames;
    config.output_dir = output_dir(options.out, config.output_dir);
    config.validate();

    StageTimes total;
    StageTimes previous;
    std::vector<double> frame, viewgen, correspondence, least_squares, resample;
    run_experiment(config.to_scenario(), config.seed, &total, [&](const FrameMetrics&) {
      frame.push_back(total.frame - previous.frame);
      viewgen.push_back(total.viewgen - previous.viewgen);
      correspondence.push_back(total.correspondence - previous.correspondence);
      least_squares.push_back(total.least_squares - previous.least_squares);
      resample.push_back(total.resample - previous.resample);
      previous = total;
    });

    std::ofstream f = open_output(fs::path(config.output_dir) / "bench.csv");
    auto emit = [&](std::ostream& o) {
      o << "stage,mean_s,p50_s,p95_s\n";
      const std::pair<const char*, const std::vector<double>*> rows[] = {
          {"frame", &frame},
          {"viewgen", &viewgen},
          {"correspondence", &correspondence},
          {"least_squares", &least_squares},
          {"resample", &resample}};
      for (const auto& [name, values] : rows) {
        const Stat s = stats(*values);
        char line[160];
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f\n", name, s.mean, s.p50, s.p95);
        o << line;
      }
    };
    emit(f);
    emit(out);
    return static_cast<int>(kExitOk);
  });
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Particle-filter object pose estimation with synthetic view generation", "gapf"};
  app.require_subcommand(1);

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a scenario and write metrics and summary files");
  run_cmd->add_option("--config", run.config, "Scenario config file")->required();
  run_cmd->add_option("--seed", run.seed, "Override run.seed");
  run_cmd->add_option("--out", run.out, "Output directory (overrides GAPF_OUT_DIR and run.output_dir)");
  run_cmd->add_option("--jobs", run.jobs, "Worker threads for the particle update")->check(CLI::PositiveNumber);
  run_cmd->add_option("--frames", run.frames, "Override trajectory.frames");

  ViewgenOptions view;
  CLI::App* view_cmd = app.add_subcommand("viewgen", "Render the visible points of a mesh from one pose");
  view_cmd->add_option("--mesh", view.mesh, "OBJ/PLY file or builtin:engine_block / builtin:sphere");
  view_cmd->add_option("--scale", view.scale, "Uniform mesh scale");
  view_cmd->add_option("--pose", view.pose, "Camera pose in the object frame: tx ty tz roll pitch yaw (m, deg)")
      ->required();
  view_cmd->add_option("--config", view.config, "Take camera intrinsics and sample budget from a scenario");
  view_cmd->add_option("--samples", view.samples, "Surface samples");
  view_cmd->add_option("--seed", view.seed, "Sampling seed");
  view_cmd->add_option("--out", view.output, "Output PLY path");

  BenchOptions bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time filter frames and report per-stage statistics");
  bench_cmd->add_option("--config", bench.config, "Scenario config file")->required();
  bench_cmd->add_option("--seed", bench.seed, "Override run.seed");
  bench_cmd->add_option("--out", bench.out, "Output directory for bench.csv");
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--frames", bench.frames, "Frames to time")->check(CLI::Range(2, 1000000));
  bench_cmd->add_option("--particles", bench.particles, "Override filter.particles")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitUsage);
  }

  if (*run_cmd) return cmd_run(run, out, err);
  if (*view_cmd) return cmd_viewgen(view, out, err);
  return cmd_bench(bench, out, err);
}

}  // namespace gapf::app
