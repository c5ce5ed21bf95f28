// AVX2 variants: four lanes of doubles per register. Compiled with -mavx2
// only (no -mfma) so every product and sum rounds exactly like the scalar
// reference.

#include <immintrin.h>

#include "fwdegen/kernels.hpp"

namespace fwdegen::kernels {

namespace {

constexpr std::size_t kWidth = 4;

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

void euler_maruyama_block_avx2(const Coefficients& c, const StepBlock& b) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d dt = _mm256_set1_pd(b.dt);
  const __m256d l1 = _mm256_set1_pd(c.lambda1);
  const __m256d l2 = _mm256_set1_pd(c.lambda2);
  const __m256d l3 = _mm256_set1_pd(c.lambda3);
  const __m256d s0 = _mm256_set1_pd(c.sigma0);
  const __m256d s1 = _mm256_set1_pd(c.sigma1);
  const __m256d eps = _mm256_set1_pd(c.epsilon);
  const __m256d ct = _mm256_set1_pd(c.cos_theta);
  const __m256d st = _mm256_set1_pd(c.sin_theta);

  __m256d ra[kMaxKernelRegions];
  __m256d rb[kMaxKernelRegions];
  for (std::size_t r = 0; r < b.n_regions; ++r) {
    ra[r] = _mm256_set1_pd(b.regions[r].a);
    rb[r] = _mm256_set1_pd(b.regions[r].b);
  }

  const std::size_t vec_lanes = b.lanes - b.lanes % kWidth;
  for (std::size_t lane = 0; lane < vec_lanes; lane += kWidth) {
    __m256d x = _mm256_loadu_pd(b.x + lane);
    __m256d y = _mm256_loadu_pd(b.y + lane);
    __m256i cnt[kMaxKernelRegions];
    for (std::size_t r = 0; r < b.n_regions; ++r) cnt[r] = _mm256_setzero_si256();

    for (std::size_t k = 0; k < b.steps; ++k) {
      const __m256d dw = _mm256_loadu_pd(b.dw + k * b.lanes + lane);
      const __m256d cubic = _mm256_mul_pd(x, _mm256_sub_pd(one, _mm256_mul_pd(x, x)));
      const __m256d sig = _mm256_add_pd(s0, _mm256_mul_pd(s1, x));
      const __m256d noise = _mm256_mul_pd(_mm256_mul_pd(eps, sig), dw);
      const __m256d xn = _mm256_add_pd(_mm256_add_pd(x, _mm256_mul_pd(_mm256_mul_pd(l1, cubic), dt)),
                                       _mm256_mul_pd(ct, noise));
      const __m256d ydrift = _mm256_sub_pd(_mm256_mul_pd(l3, cubic), _mm256_mul_pd(l2, y));
      const __m256d yn = _mm256_add_pd(_mm256_add_pd(y, _mm256_mul_pd(ydrift, dt)),
                                       _mm256_mul_pd(st, noise));
      x = xn;
      y = yn;

      if (b.count) {
        for (std::size_t r = 0; r < b.n_regions; ++r) {
          __m256d mask;
          switch (b.regions[r].kind) {
            case RegionTest::Kind::band:
              mask = _mm256_cmp_pd(abs_pd(_mm256_sub_pd(x, ra[r])), rb[r], _CMP_LE_OQ);
              break;
            case RegionTest::Kind::outside_ball:
              mask = _mm256_cmp_pd(_mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y)), ra[r],
                                   _CMP_GT_OQ);
              break;
            case RegionTest::Kind::whole_plane:
            default:
              mask = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
              break;
          }
          // A true lane is all ones, i.e. -1 as a signed 64-bit integer.
          cnt[r] = _mm256_sub_epi64(cnt[r], _mm256_castpd_si256(mask));
        }
      }
    }

    _mm256_storeu_pd(b.x + lane, x);
    _mm256_storeu_pd(b.y + lane, y);
    if (b.count) {
      for (std::size_t r = 0; r < b.n_regions; ++r) {
        alignas(32) std::uint64_t tmp[kWidth];
        _mm256_store_si256(reinterpret_cast<__m256i*>(tmp), cnt[r]);
        for (std::size_t j = 0; j < kWidth; ++j) b.counts[r * b.lanes + lane + j] += tmp[j];
      }
    }
  }

  // Remainder lanes through the reference formula.
  for (std::size_t lane = vec_lanes; lane < b.lanes; ++lane) {
    double x = b.x[lane];
    double y = b.y[lane];
    std::uint64_t local[kMaxKernelRegions] = {};
    for (std::size_t k = 0; k < b.steps; ++k) {
      ref::euler_maruyama_step(c, b.dt, b.dw[k * b.lanes + lane], x, y);
      if (b.count) {
        for (std::size_t r = 0; r < b.n_regions; ++r) local[r] += ref::in_region(b.regions[r], x, y);
      }
    }
    b.x[lane] = x;
    b.y[lane] = y;
    if (b.count) {
      for (std::size_t r = 0; r < b.n_regions; ++r) b.counts[r * b.lanes + lane] += local[r];
    }
  }
}

void generator_on_w_row_avx2(const Coefficients& c, double alpha, double y_scalar, const double* xs,
                             double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d y = _mm256_set1_pd(y_scalar);
  const __m256d k_quartic = _mm256_set1_pd(4.0 * c.lambda1);
  const __m256d k_y = _mm256_set1_pd(2.0 * alpha);
  const __m256d l2 = _mm256_set1_pd(c.lambda2);
  const __m256d l3 = _mm256_set1_pd(c.lambda3);
  const __m256d s0 = _mm256_set1_pd(c.sigma0);
  const __m256d s1 = _mm256_set1_pd(c.sigma1);
  const __m256d e2 = _mm256_set1_pd(c.epsilon * c.epsilon);
  const __m256d k_x2 = _mm256_set1_pd(6.0 * (c.cos_theta * c.cos_theta));
  const __m256d k_const = _mm256_set1_pd(alpha * (c.sin_theta * c.sin_theta));
  // Row-constant: (2 alpha y) and (l2 y).
  const __m256d ky_y = _mm256_mul_pd(k_y, y);
  const __m256d l2_y = _mm256_mul_pd(l2, y);

  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d x = _mm256_loadu_pd(xs + i);
    const __m256d x2 = _mm256_mul_pd(x, x);
    const __m256d one_minus = _mm256_sub_pd(one, x2);
    const __m256d cubic = _mm256_mul_pd(x, one_minus);
    const __m256d x4 = _mm256_mul_pd(x2, x2);
    const __m256d sig = _mm256_add_pd(s0, _mm256_mul_pd(s1, x));
    const __m256d quartic_term = _mm256_mul_pd(_mm256_mul_pd(k_quartic, x4), one_minus);
    const __m256d y_term = _mm256_mul_pd(ky_y, _mm256_sub_pd(l2_y, _mm256_mul_pd(l3, cubic)));
    const __m256d curvature = _mm256_add_pd(_mm256_mul_pd(k_x2, x2), k_const);
    const __m256d noise_term = _mm256_mul_pd(_mm256_mul_pd(e2, _mm256_mul_pd(sig, sig)), curvature);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_sub_pd(quartic_term, y_term), noise_term));
  }
  for (; i < n; ++i) out[i] = ref::generator_on_w(c, alpha, xs[i], y_scalar);
}

void lagrangian_avx2(const Coefficients& c, const double* w, const double* wdot, double* out,
                     std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d l1 = _mm256_set1_pd(c.lambda1);
  const __m256d s0 = _mm256_set1_pd(c.sigma0);
  const __m256d s1 = _mm256_set1_pd(c.sigma1);
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d v = _mm256_loadu_pd(w + i);
    const __m256d vd = _mm256_loadu_pd(wdot + i);
    const __m256d flow = _mm256_mul_pd(l1, _mm256_mul_pd(v, _mm256_sub_pd(one, _mm256_mul_pd(v, v))));
    const __m256d g = _mm256_div_pd(_mm256_sub_pd(vd, flow), _mm256_add_pd(s0, _mm256_mul_pd(s1, v)));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(half, _mm256_mul_pd(g, g)));
  }
  for (; i < n; ++i) out[i] = ref::lagrangian(c, w[i], wdot[i]);
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{"avx2", &euler_maruyama_block_avx2, &generator_on_w_row_avx2,
                                 &lagrangian_avx2};
  return table;
}

}  // namespace fwdegen::kernels
