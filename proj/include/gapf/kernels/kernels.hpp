#pragma once

// Data-parallel inner loops shared by view generation and registration.
//
// Every kernel has a scalar reference implementation and optional SIMD
// variants (AVX2 on x86-64, NEON on AArch64) selected once at runtime.
// Variants evaluate the same floating-point operations in the same order, so
// transform/project/nearest/count results are bit-identical to the scalar
// reference; sum_squared_residuals uses lane-parallel accumulation and agrees
// to rounding only.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace gapf::kernels {

struct ConstSoa {
  const double* x = nullptr;
  const double* y = nullptr;
  const double* z = nullptr;
};

struct MutSoa {
  double* x = nullptr;
  double* y = nullptr;
  double* z = nullptr;
};

/// Row-major [R | t].
using Rigid = std::array<double, 12>;

struct ProjectParams {
  Rigid rigid{};  // model frame -> camera frame
  double fx = 0, fy = 0, cx = 0, cy = 0;
  double near_clip = 0, far_clip = 0;
  std::int32_t width = 0, height = 0;
  bool cull_back_faces = false;
};

struct Nearest {
  std::size_t position = 0;  // == n when the block is empty
  double d2 = 0;
};

struct KernelTable {
  const char* name;

  /// out = R * in + t.
  void (*transform_points)(const Rigid& rigid, ConstSoa in, MutSoa out, std::size_t n);

  /// pixel[i] = v * width + u for points that are in front of the camera,
  /// inside [near, far], inside the image, and (optionally) front-facing;
  /// -1 otherwise. depth[i] receives the camera-frame z for every point.
  void (*project_points)(const ProjectParams& params, ConstSoa points, ConstSoa normals, std::size_t n,
                         std::int32_t* pixel, double* depth);

  /// Lexicographic minimum of (squared distance, position).
  Nearest (*nearest_in_block)(const double* query, ConstSoa points, std::size_t n);

  /// Counts i with |R*src_i + t - dst_i|^2 <= threshold2; mask may be null.
  std::size_t (*count_inliers)(const Rigid& rigid, ConstSoa src, ConstSoa dst, std::size_t n, double threshold2,
                               std::uint8_t* mask);

  /// Sum of |R*src_i + t - dst_i|^2.
  double (*sum_squared_residuals)(const Rigid& rigid, ConstSoa src, ConstSoa dst, std::size_t n);
};

const KernelTable& scalar();
/// nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2();
const KernelTable* neon();

/// Widest supported variant. GAPF_SIMD=scalar in the environment forces the
/// reference path.
const KernelTable& active();

std::vector<const KernelTable*> available();

}  // namespace gapf::kernels
