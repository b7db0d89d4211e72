// AVX2 + FMA variants. This file is compiled with -mavx2 -mfma and must only
// be entered after a CPUID check (see dispatch.cpp).

#include <immintrin.h>

#include <cmath>

#include "hamlearn/kernels.hpp"

namespace hamlearn::kernels {
namespace {

// 4 rows x 8 columns register tile, k innermost.
inline void tile_4x8(std::size_t k, const double* a, std::size_t lda, const double* b,
                     std::size_t ldb, double* c, std::size_t ldc) {
  __m256d c00 = _mm256_loadu_pd(c), c01 = _mm256_loadu_pd(c + 4);
  __m256d c10 = _mm256_loadu_pd(c + ldc), c11 = _mm256_loadu_pd(c + ldc + 4);
  __m256d c20 = _mm256_loadu_pd(c + 2 * ldc), c21 = _mm256_loadu_pd(c + 2 * ldc + 4);
  __m256d c30 = _mm256_loadu_pd(c + 3 * ldc), c31 = _mm256_loadu_pd(c + 3 * ldc + 4);
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
    const __m256d b1 = _mm256_loadu_pd(b + p * ldb + 4);
    __m256d av = _mm256_broadcast_sd(a + p);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    av = _mm256_broadcast_sd(a + lda + p);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    av = _mm256_broadcast_sd(a + 2 * lda + p);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    av = _mm256_broadcast_sd(a + 3 * lda + p);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
  }
  _mm256_storeu_pd(c, c00);
  _mm256_storeu_pd(c + 4, c01);
  _mm256_storeu_pd(c + ldc, c10);
  _mm256_storeu_pd(c + ldc + 4, c11);
  _mm256_storeu_pd(c + 2 * ldc, c20);
  _mm256_storeu_pd(c + 2 * ldc + 4, c21);
  _mm256_storeu_pd(c + 3 * ldc, c30);
  _mm256_storeu_pd(c + 3 * ldc + 4, c31);
}

// 1 row x 4 columns.
inline void tile_1x4(std::size_t k, const double* a, const double* b, std::size_t ldb, double* c) {
  __m256d acc = _mm256_loadu_pd(c);
  for (std::size_t p = 0; p < k; ++p) {
    acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p), _mm256_loadu_pd(b + p * ldb), acc);
  }
  _mm256_storeu_pd(c, acc);
}

inline void tile_1x1(std::size_t k, const double* a, const double* b, std::size_t ldb, double* c) {
  double acc = *c;
  for (std::size_t p = 0; p < k; ++p) acc = std::fma(a[p], b[p * ldb], acc);
  *c = acc;
}

void gemm_acc_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                   const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const std::size_t n8 = n - n % 8;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* ai = a + i * lda;
    double* ci = c + i * ldc;
    for (std::size_t j = 0; j < n8; j += 8) tile_4x8(k, ai, lda, b + j, ldb, ci + j, ldc);
    for (std::size_t r = 0; r < 4; ++r) {
      std::size_t j = n8;
      for (; j + 4 <= n; j += 4) tile_1x4(k, ai + r * lda, b + j, ldb, ci + r * ldc + j);
      for (; j < n; ++j) tile_1x1(k, ai + r * lda, b + j, ldb, ci + r * ldc + j);
    }
  }
  for (; i < m; ++i) {
    const double* ai = a + i * lda;
    double* ci = c + i * ldc;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) tile_1x4(k, ai, b + j, ldb, ci + j);
    for (; j < n; ++j) tile_1x1(k, ai, b + j, ldb, ci + j);
  }
}

// exp(x) for x already clamped to [-708, 708]. Cody-Waite reduction by ln 2
// followed by a degree-13 Taylor polynomial on |r| <= ln2/2.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d nd = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(nd, ln2_hi, x);
  r = _mm256_fnmadd_pd(nd, ln2_lo, r);

  static constexpr double kInvFact[14] = {
      1.0,
      1.0,
      1.0 / 2.0,
      1.0 / 6.0,
      1.0 / 24.0,
      1.0 / 120.0,
      1.0 / 720.0,
      1.0 / 5040.0,
      1.0 / 40320.0,
      1.0 / 362880.0,
      1.0 / 3628800.0,
      1.0 / 39916800.0,
      1.0 / 479001600.0,
      1.0 / 6227020800.0,
  };
  __m256d poly = _mm256_set1_pd(kInvFact[13]);
  for (int d = 12; d >= 0; --d) poly = _mm256_fmadd_pd(poly, r, _mm256_set1_pd(kInvFact[d]));

  // 2^n via the 1.5*2^52 rounding constant: the low mantissa bits hold n.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);
  __m256i n = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(nd, magic)),
                               _mm256_castpd_si256(magic));
  n = _mm256_slli_epi64(_mm256_add_epi64(n, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(poly, _mm256_castsi256_pd(n));
}

// exp(r) - 1 for |r| <= ln2/2, without cancellation.
inline __m256d expm1_small_pd(__m256d r) {
  static constexpr double kInvFact[14] = {
      1.0,
      1.0,
      1.0 / 2.0,
      1.0 / 6.0,
      1.0 / 24.0,
      1.0 / 120.0,
      1.0 / 720.0,
      1.0 / 5040.0,
      1.0 / 40320.0,
      1.0 / 362880.0,
      1.0 / 3628800.0,
      1.0 / 39916800.0,
      1.0 / 479001600.0,
      1.0 / 6227020800.0,
  };
  __m256d poly = _mm256_set1_pd(kInvFact[13]);
  for (int d = 12; d >= 1; --d) poly = _mm256_fmadd_pd(poly, r, _mm256_set1_pd(kInvFact[d]));
  return _mm256_mul_pd(poly, r);
}

inline __m256d clamp_exp_arg(__m256d x) {
  return _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(708.0));
}

void sigmoid_avx2(const double* x, double* y, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d e = exp_pd(clamp_exp_arg(_mm256_sub_pd(zero, v)));
    _mm256_storeu_pd(y + i, _mm256_div_pd(one, _mm256_add_pd(one, e)));
  }
  for (; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void tanh_avx2(const double* x, double* y, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d small = _mm256_set1_pd(0.34657359027997264);  // ln2 / 2
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d sign = _mm256_and_pd(v, sign_mask);
    const __m256d a = _mm256_andnot_pd(sign_mask, v);
    const __m256d m2a = _mm256_mul_pd(_mm256_set1_pd(-2.0), a);
    // u = exp(-2|x|) - 1, so tanh|x| = -u / (2 + u).
    const __m256d u_large = _mm256_sub_pd(exp_pd(clamp_exp_arg(m2a)), one);
    const __m256d u_small = expm1_small_pd(m2a);
    const __m256d use_small = _mm256_cmp_pd(_mm256_mul_pd(two, a), small, _CMP_LE_OQ);
    const __m256d u = _mm256_blendv_pd(u_large, u_small, use_small);
    const __m256d t = _mm256_div_pd(_mm256_sub_pd(_mm256_setzero_pd(), u), _mm256_add_pd(two, u));
    _mm256_storeu_pd(y + i, _mm256_or_pd(t, sign));
  }
  for (; i < n; ++i) y[i] = std::tanh(x[i]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{gemm_acc_avx2, sigmoid_avx2, tanh_avx2, dot_avx2, axpy_avx2};
  return t;
}

}  // namespace hamlearn::kernels
