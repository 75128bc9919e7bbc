#pragma once

// Scalar reference kernels. SIMD variants call these for loop tails, so the
// expression order here is the contract the vector code reproduces.

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "gapf/kernels/kernels.hpp"

namespace gapf::kernels::detail {

inline void transform_points_scalar(const Rigid& m, ConstSoa in, MutSoa out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double x = in.x[i], y = in.y[i], z = in.z[i];
    out.x[i] = m[0] * x + m[1] * y + m[2] * z + m[3];
    out.y[i] = m[4] * x + m[5] * y + m[6] * z + m[7];
    out.z[i] = m[8] * x + m[9] * y + m[10] * z + m[11];
  }
}

inline void project_points_scalar(const ProjectParams& p, ConstSoa pts, ConstSoa nrm, std::size_t n,
                                  std::int32_t* pixel, double* depth) {
  const Rigid& m = p.rigid;
  const double w = p.width, h = p.height;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pts.x[i], y = pts.y[i], z = pts.z[i];
    const double xc = m[0] * x + m[1] * y + m[2] * z + m[3];
    const double yc = m[4] * x + m[5] * y + m[6] * z + m[7];
    const double zc = m[8] * x + m[9] * y + m[10] * z + m[11];
    depth[i] = zc;
    bool ok = zc >= p.near_clip && zc <= p.far_clip;
    if (p.cull_back_faces) {
      const double nx = nrm.x[i], ny = nrm.y[i], nz = nrm.z[i];
      const double nxc = m[0] * nx + m[1] * ny + m[2] * nz;
      const double nyc = m[4] * nx + m[5] * ny + m[6] * nz;
      const double nzc = m[8] * nx + m[9] * ny + m[10] * nz;
      ok = ok && (nxc * xc + nyc * yc + nzc * zc < 0.0);
    }
    const double u = std::floor(p.fx * xc / zc + p.cx);
    const double v = std::floor(p.fy * yc / zc + p.cy);
    ok = ok && u >= 0.0 && u < w && v >= 0.0 && v < h;
    pixel[i] = ok ? static_cast<std::int32_t>(v) * p.width + static_cast<std::int32_t>(u) : -1;
  }
}

inline Nearest nearest_in_block_scalar(const double* q, ConstSoa pts, std::size_t n) {
  Nearest best{n, INFINITY};
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pts.x[i] - q[0];
    const double dy = pts.y[i] - q[1];
    const double dz = pts.z[i] - q[2];
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best.d2) best = {i, d2};
  }
  return best;
}

inline double residual2(const Rigid& m, ConstSoa src, ConstSoa dst, std::size_t i) {
  const double x = src.x[i], y = src.y[i], z = src.z[i];
  const double rx = m[0] * x + m[1] * y + m[2] * z + m[3] - dst.x[i];
  const double ry = m[4] * x + m[5] * y + m[6] * z + m[7] - dst.y[i];
  const double rz = m[8] * x + m[9] * y + m[10] * z + m[11] - dst.z[i];
  return rx * rx + ry * ry + rz * rz;
}

inline std::size_t count_inliers_scalar(const Rigid& m, ConstSoa src, ConstSoa dst, std::size_t n, double threshold2,
                                        std::uint8_t* mask) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool in = residual2(m, src, dst, i) <= threshold2;
    if (mask) mask[i] = in ? 1 : 0;
    count += in ? 1 : 0;
  }
  return count;
}

inline double sum_squared_residuals_scalar(const Rigid& m, ConstSoa src, ConstSoa dst, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += residual2(m, src, dst, i);
  return sum;
}

}  // namespace gapf::kernels::detail
