#include "gapf/kernels/kernels.hpp"

#if (defined(__x86_64__) || defined(_M_X64)) && !defined(GAPF_NO_SIMD)

#include <immintrin.h>

#include <cmath>

#include "kernels/scalar_impl.hpp"

namespace gapf::kernels {
namespace {

struct RigidLanes {
  __m256d m[12];
  explicit RigidLanes(const Rigid& r) {
    for (int k = 0; k < 12; ++k) m[k] = _mm256_set1_pd(r[k]);
  }
};

// ((a*x + b*y) + c*z) + d, without contraction.
inline __m256d affine_row(__m256d a, __m256d b, __m256d c, __m256d d, __m256d x, __m256d y, __m256d z) {
  return _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a, x), _mm256_mul_pd(b, y)), _mm256_mul_pd(c, z)), d);
}

inline __m256d linear_row(__m256d a, __m256d b, __m256d c, __m256d x, __m256d y, __m256d z) {
  return _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a, x), _mm256_mul_pd(b, y)), _mm256_mul_pd(c, z));
}

inline __m256d norm2(__m256d x, __m256d y, __m256d z) {
  return _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y)), _mm256_mul_pd(z, z));
}

void transform_points_avx2(const Rigid& rigid, ConstSoa in, MutSoa out, std::size_t n) {
  const RigidLanes r(rigid);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(in.x + i);
    const __m256d y = _mm256_loadu_pd(in.y + i);
    const __m256d z = _mm256_loadu_pd(in.z + i);
    _mm256_storeu_pd(out.x + i, affine_row(r.m[0], r.m[1], r.m[2], r.m[3], x, y, z));
    _mm256_storeu_pd(out.y + i, affine_row(r.m[4], r.m[5], r.m[6], r.m[7], x, y, z));
    _mm256_storeu_pd(out.z + i, affine_row(r.m[8], r.m[9], r.m[10], r.m[11], x, y, z));
  }
  detail::transform_points_scalar(rigid, {in.x + i, in.y + i, in.z + i}, {out.x + i, out.y + i, out.z + i}, n - i);
}

void project_points_avx2(const ProjectParams& p, ConstSoa pts, ConstSoa nrm, std::size_t n, std::int32_t* pixel,
                         double* depth) {
  const RigidLanes r(p.rigid);
  const __m256d fx = _mm256_set1_pd(p.fx), fy = _mm256_set1_pd(p.fy);
  const __m256d cx = _mm256_set1_pd(p.cx), cy = _mm256_set1_pd(p.cy);
  const __m256d near_clip = _mm256_set1_pd(p.near_clip), far_clip = _mm256_set1_pd(p.far_clip);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d width = _mm256_set1_pd(p.width), height = _mm256_set1_pd(p.height);
  const __m128i width_i = _mm_set1_epi32(p.width);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(pts.x + i);
    const __m256d y = _mm256_loadu_pd(pts.y + i);
    const __m256d z = _mm256_loadu_pd(pts.z + i);
    const __m256d xc = affine_row(r.m[0], r.m[1], r.m[2], r.m[3], x, y, z);
    const __m256d yc = affine_row(r.m[4], r.m[5], r.m[6], r.m[7], x, y, z);
    const __m256d zc = affine_row(r.m[8], r.m[9], r.m[10], r.m[11], x, y, z);
    _mm256_storeu_pd(depth + i, zc);

    __m256d ok = _mm256_and_pd(_mm256_cmp_pd(zc, near_clip, _CMP_GE_OQ), _mm256_cmp_pd(zc, far_clip, _CMP_LE_OQ));
    if (p.cull_back_faces) {
      const __m256d nx = _mm256_loadu_pd(nrm.x + i);
      const __m256d ny = _mm256_loadu_pd(nrm.y + i);
      const __m256d nz = _mm256_loadu_pd(nrm.z + i);
      const __m256d nxc = linear_row(r.m[0], r.m[1], r.m[2], nx, ny, nz);
      const __m256d nyc = linear_row(r.m[4], r.m[5], r.m[6], nx, ny, nz);
      const __m256d nzc = linear_row(r.m[8], r.m[9], r.m[10], nx, ny, nz);
      const __m256d facing = linear_row(nxc, nyc, nzc, xc, yc, zc);
      ok = _mm256_and_pd(ok, _mm256_cmp_pd(facing, zero, _CMP_LT_OQ));
    }
    const __m256d u = _mm256_floor_pd(_mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(fx, xc), zc), cx));
    const __m256d v = _mm256_floor_pd(_mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(fy, yc), zc), cy));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, zero, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, width, _CMP_LT_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(v, zero, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(v, height, _CMP_LT_OQ));

    const int bits = _mm256_movemask_pd(ok);
    alignas(16) std::int32_t lin[4];
    if (bits != 0) {
      // Rejected lanes may hold inf/NaN; zero them before conversion.
      const __m128i ui = _mm256_cvttpd_epi32(_mm256_and_pd(u, ok));
      const __m128i vi = _mm256_cvttpd_epi32(_mm256_and_pd(v, ok));
      _mm_store_si128(reinterpret_cast<__m128i*>(lin), _mm_add_epi32(_mm_mullo_epi32(vi, width_i), ui));
    }
    for (int k = 0; k < 4; ++k) pixel[i + k] = (bits >> k) & 1 ? lin[k] : -1;
  }
  detail::project_points_scalar(p, {pts.x + i, pts.y + i, pts.z + i},
                                p.cull_back_faces ? ConstSoa{nrm.x + i, nrm.y + i, nrm.z + i} : ConstSoa{}, n - i,
                                pixel + i, depth + i);
}

Nearest nearest_in_block_avx2(const double* q, ConstSoa pts, std::size_t n) {
  std::size_t i = 0;
  Nearest best{n, INFINITY};
  if (n >= 4) {
    const __m256d qx = _mm256_set1_pd(q[0]), qy = _mm256_set1_pd(q[1]), qz = _mm256_set1_pd(q[2]);
    __m256d best_d2 = _mm256_set1_pd(INFINITY);
    __m256d best_pos = _mm256_setzero_pd();
    __m256d pos = _mm256_setr_pd(0, 1, 2, 3);
    const __m256d four = _mm256_set1_pd(4.0);
    for (; i + 4 <= n; i += 4) {
      const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(pts.x + i), qx);
      const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(pts.y + i), qy);
      const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(pts.z + i), qz);
      const __m256d d2 = norm2(dx, dy, dz);
      const __m256d lt = _mm256_cmp_pd(d2, best_d2, _CMP_LT_OQ);
      best_d2 = _mm256_blendv_pd(best_d2, d2, lt);
      best_pos = _mm256_blendv_pd(best_pos, pos, lt);
      pos = _mm256_add_pd(pos, four);
    }
    alignas(32) double d2s[4];
    alignas(32) double ps[4];
    _mm256_store_pd(d2s, best_d2);
    _mm256_store_pd(ps, best_pos);
    for (int k = 0; k < 4; ++k) {
      const auto position = static_cast<std::size_t>(ps[k]);
      if (d2s[k] < best.d2 || (d2s[k] == best.d2 && position < best.position)) best = {position, d2s[k]};
    }
  }
  const Nearest tail = detail::nearest_in_block_scalar(q, {pts.x + i, pts.y + i, pts.z + i}, n - i);
  if (tail.position < n - i && tail.d2 < best.d2) best = {tail.position + i, tail.d2};
  return best;
}

inline __m256d residual2(const RigidLanes& r, ConstSoa src, ConstSoa dst, std::size_t i) {
  const __m256d x = _mm256_loadu_pd(src.x + i);
  const __m256d y = _mm256_loadu_pd(src.y + i);
  const __m256d z = _mm256_loadu_pd(src.z + i);
  const __m256d rx = _mm256_sub_pd(affine_row(r.m[0], r.m[1], r.m[2], r.m[3], x, y, z), _mm256_loadu_pd(dst.x + i));
  const __m256d ry = _mm256_sub_pd(affine_row(r.m[4], r.m[5], r.m[6], r.m[7], x, y, z), _mm256_loadu_pd(dst.y + i));
  const __m256d rz = _mm256_sub_pd(affine_row(r.m[8], r.m[9], r.m[10], r.m[11], x, y, z), _mm256_loadu_pd(dst.z + i));
  return norm2(rx, ry, rz);
}

std::size_t count_inliers_avx2(const Rigid& rigid, ConstSoa src, ConstSoa dst, std::size_t n, double threshold2,
                               std::uint8_t* mask) {
  const RigidLanes r(rigid);
  const __m256d thr = _mm256_set1_pd(threshold2);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int bits = _mm256_movemask_pd(_mm256_cmp_pd(residual2(r, src, dst, i), thr, _CMP_LE_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(bits)));
    if (mask) {
      for (int k = 0; k < 4; ++k) mask[i + k] = static_cast<std::uint8_t>((bits >> k) & 1);
    }
  }
  return count + detail::count_inliers_scalar(rigid, {src.x + i, src.y + i, src.z + i},
                                              {dst.x + i, dst.y + i, dst.z + i}, n - i, threshold2,
                                              mask ? mask + i : nullptr);
}

double sum_squared_residuals_avx2(const Rigid& rigid, ConstSoa src, ConstSoa dst, std::size_t n) {
  const RigidLanes r(rigid);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, residual2(r, src, dst, i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  const double head = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  return head + detail::sum_squared_residuals_scalar(rigid, {src.x + i, src.y + i, src.z + i},
                                                     {dst.x + i, dst.y + i, dst.z + i}, n - i);
}

}  // namespace

const KernelTable* avx2() {
  static const bool supported = __builtin_cpu_supports("avx2");
  static const KernelTable table{
      "avx2",
      &transform_points_avx2,
      &project_points_avx2,
      &nearest_in_block_avx2,
      &count_inliers_avx2,
      &sum_squared_residuals_avx2,
  };
  return supported ? &table : nullptr;
}

}  // namespace gapf::kernels

#else

namespace gapf::kernels {
const KernelTable* avx2() { return nullptr; }
}  // namespace gapf::kernels

#endif
