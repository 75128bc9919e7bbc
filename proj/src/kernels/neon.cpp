#include "gapf/kernels/kernels.hpp"

#if defined(__aarch64__) && !defined(GAPF_NO_SIMD)

#include <arm_neon.h>

#include <cmath>

#include "kernels/scalar_impl.hpp"

namespace gapf::kernels {
namespace {

struct RigidLanes {
  float64x2_t m[12];
  explicit RigidLanes(const Rigid& r) {
    for (int k = 0; k < 12; ++k) m[k] = vdupq_n_f64(r[k]);
  }
};

// vmulq/vaddq only: fused forms would break bit-equality with the scalar path.
inline float64x2_t affine_row(const float64x2_t* m, float64x2_t x, float64x2_t y, float64x2_t z) {
  return vaddq_f64(vaddq_f64(vaddq_f64(vmulq_f64(m[0], x), vmulq_f64(m[1], y)), vmulq_f64(m[2], z)), m[3]);
}

inline float64x2_t linear_row(float64x2_t a, float64x2_t b, float64x2_t c, float64x2_t x, float64x2_t y,
                              float64x2_t z) {
  return vaddq_f64(vaddq_f64(vmulq_f64(a, x), vmulq_f64(b, y)), vmulq_f64(c, z));
}

inline float64x2_t norm2(float64x2_t x, float64x2_t y, float64x2_t z) {
  return vaddq_f64(vaddq_f64(vmulq_f64(x, x), vmulq_f64(y, y)), vmulq_f64(z, z));
}

void transform_points_neon(const Rigid& rigid, ConstSoa in, MutSoa out, std::size_t n) {
  const RigidLanes r(rigid);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(in.x + i), y = vld1q_f64(in.y + i), z = vld1q_f64(in.z + i);
    vst1q_f64(out.x + i, affine_row(r.m + 0, x, y, z));
    vst1q_f64(out.y + i, affine_row(r.m + 4, x, y, z));
    vst1q_f64(out.z + i, affine_row(r.m + 8, x, y, z));
  }
  detail::transform_points_scalar(rigid, {in.x + i, in.y + i, in.z + i}, {out.x + i, out.y + i, out.z + i}, n - i);
}

void project_points_neon(const ProjectParams& p, ConstSoa pts, ConstSoa nrm, std::size_t n, std::int32_t* pixel,
                         double* depth) {
  const RigidLanes r(p.rigid);
  const float64x2_t fx = vdupq_n_f64(p.fx), fy = vdupq_n_f64(p.fy);
  const float64x2_t cx = vdupq_n_f64(p.cx), cy = vdupq_n_f64(p.cy);
  const float64x2_t near_clip = vdupq_n_f64(p.near_clip), far_clip = vdupq_n_f64(p.far_clip);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t width = vdupq_n_f64(p.width), height = vdupq_n_f64(p.height);

  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(pts.x + i), y = vld1q_f64(pts.y + i), z = vld1q_f64(pts.z + i);
    const float64x2_t xc = affine_row(r.m + 0, x, y, z);
    const float64x2_t yc = affine_row(r.m + 4, x, y, z);
    const float64x2_t zc = affine_row(r.m + 8, x, y, z);
    vst1q_f64(depth + i, zc);

    uint64x2_t ok = vandq_u64(vcgeq_f64(zc, near_clip), vcleq_f64(zc, far_clip));
    if (p.cull_back_faces) {
      const float64x2_t nx = vld1q_f64(nrm.x + i), ny = vld1q_f64(nrm.y + i), nz = vld1q_f64(nrm.z + i);
      const float64x2_t nxc = linear_row(r.m[0], r.m[1], r.m[2], nx, ny, nz);
      const float64x2_t nyc = linear_row(r.m[4], r.m[5], r.m[6], nx, ny, nz);
      const float64x2_t nzc = linear_row(r.m[8], r.m[9], r.m[10], nx, ny, nz);
      ok = vandq_u64(ok, vcltq_f64(linear_row(nxc, nyc, nzc, xc, yc, zc), zero));
    }
    const float64x2_t u = vrndmq_f64(vaddq_f64(vdivq_f64(vmulq_f64(fx, xc), zc), cx));
    const float64x2_t v = vrndmq_f64(vaddq_f64(vdivq_f64(vmulq_f64(fy, yc), zc), cy));
    ok = vandq_u64(ok, vandq_u64(vcgeq_f64(u, zero), vcltq_f64(u, width)));
    ok = vandq_u64(ok, vandq_u64(vcgeq_f64(v, zero), vcltq_f64(v, height)));

    double us[2], vs[2];
    vst1q_f64(us, u);
    vst1q_f64(vs, v);
    for (int k = 0; k < 2; ++k) {
      const bool lane_ok = (k == 0 ? vgetq_lane_u64(ok, 0) : vgetq_lane_u64(ok, 1)) != 0;
      pixel[i + k] =
          lane_ok ? static_cast<std::int32_t>(vs[k]) * p.width + static_cast<std::int32_t>(us[k]) : -1;
    }
  }
  detail::project_points_scalar(p, {pts.x + i, pts.y + i, pts.z + i},
                                p.cull_back_faces ? ConstSoa{nrm.x + i, nrm.y + i, nrm.z + i} : ConstSoa{}, n - i,
                                pixel + i, depth + i);
}

Nearest nearest_in_block_neon(const double* q, ConstSoa pts, std::size_t n) {
  Nearest best{n, INFINITY};
  const float64x2_t qx = vdupq_n_f64(q[0]), qy = vdupq_n_f64(q[1]), qz = vdupq_n_f64(q[2]);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d2 = norm2(vsubq_f64(vld1q_f64(pts.x + i), qx), vsubq_f64(vld1q_f64(pts.y + i), qy),
                                 vsubq_f64(vld1q_f64(pts.z + i), qz));
    const double a = vgetq_lane_f64(d2, 0), b = vgetq_lane_f64(d2, 1);
    if (a < best.d2) best = {i, a};
    if (b < best.d2) best = {i + 1, b};
  }
  const Nearest tail = detail::nearest_in_block_scalar(q, {pts.x + i, pts.y + i, pts.z + i}, n - i);
  if (tail.position < n - i && tail.d2 < best.d2) best = {tail.position + i, tail.d2};
  return best;
}

inline float64x2_t residual2(const RigidLanes& r, ConstSoa src, ConstSoa dst, std::size_t i) {
  const float64x2_t x = vld1q_f64(src.x + i), y = vld1q_f64(src.y + i), z = vld1q_f64(src.z + i);
  return norm2(vsubq_f64(affine_row(r.m + 0, x, y, z), vld1q_f64(dst.x + i)),
               vsubq_f64(affine_row(r.m + 4, x, y, z), vld1q_f64(dst.y + i)),
               vsubq_f64(affine_row(r.m + 8, x, y, z), vld1q_f64(dst.z + i)));
}

std::size_t count_inliers_neon(const Rigid& rigid, ConstSoa src, ConstSoa dst, std::size_t n, double threshold2,
                               std::uint8_t* mask) {
  const RigidLanes r(rigid);
  const float64x2_t thr = vdupq_n_f64(threshold2);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t in = vcleq_f64(residual2(r, src, dst, i), thr);
    const bool a = vgetq_lane_u64(in, 0) != 0, b = vgetq_lane_u64(in, 1) != 0;
    count += static_cast<std::size_t>(a) + static_cast<std::size_t>(b);
    if (mask) {
      mask[i] = a;
      mask[i + 1] = b;
    }
  }
  return count + detail::count_inliers_scalar(rigid, {src.x + i, src.y + i, src.z + i},
                                              {dst.x + i, dst.y + i, dst.z + i}, n - i, threshold2,
                                              mask ? mask + i : nullptr);
}

double sum_squared_residuals_neon(const Rigid& rigid, ConstSoa src, ConstSoa dst, std::size_t n) {
  const RigidLanes r(rigid);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, residual2(r, src, dst, i));
  return vaddvq_f64(acc) + detail::sum_squared_residuals_scalar(rigid, {src.x + i, src.y + i, src.z + i},
                                                                {dst.x + i, dst.y + i, dst.z + i}, n - i);
}

}  // namespace

const KernelTable* neon() {
  static const KernelTable table{
      "neon",
      &transform_points_neon,
      &project_points_neon,
      &nearest_in_block_neon,
      &count_inliers_neon,
      &sum_squared_residuals_neon,
  };
  return &table;
}

}  // namespace gapf::kernels

#else

namespace gapf::kernels {
const KernelTable* neon() { return nullptr; }
}  // namespace gapf::kernels

#endif
