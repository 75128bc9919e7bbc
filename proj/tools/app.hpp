#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace gapf::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitMesh = 3,
  kExitRuntime = 4,
};

/// Environment variable that overrides the config's output directory.
/// An explicit --out still wins.
inline constexpr const char* kOutDirEnv = "GAPF_OUT_DIR";

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  std::optional<std::size_t> frames;
};

struct ViewgenOptions {
  std::string mesh = "builtin:engine_block";
  double scale = 1.0;
  std::array<double, 6> pose{};  // tx ty tz (m), roll pitch yaw (deg); camera in object frame
  std::optional<std::string> config;  // camera intrinsics and sample budget
  std::size_t samples = 50000;
  std::uint64_t seed = 1;
  std::string output = "view.ply";
};

struct BenchOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  std::size_t frames = 20;
  std::optional<std::size_t> particles;
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_viewgen(const ViewgenOptions& options, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv with subcommands run / viewgen / bench and dispatches.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gapf::app
