#include "matkit/simd_kernels.hpp"

// AVX2 variants, compiled as the only -mavx2 translation unit. Multiplies
// and adds stay separate instructions (no FMA) so results match the scalar
// reference bit for bit.

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace matkit {
namespace simd {

namespace {

__attribute__((target("avx2"))) void scale_add_avx2(double a, const double* x,
                                                    double b, const double* y,
                                                    double* out, size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                              _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(out + i, t);
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

__attribute__((target("avx2"))) void axpy_avx2(double a, const double* x,
                                               double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_add_pd(_mm256_loadu_pd(y + i),
                              _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, t);
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

__attribute__((target("avx2"))) void mul_avx2(const double* x, const double* y,
                                              double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

__attribute__((target("avx2"))) inline double hsum(__m256d acc) {
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d pair = _mm_add_pd(lo, hi);  // {s0+s2, s1+s3}
  return _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
}

__attribute__((target("avx2"))) double dot_avx2(const double* x, const double* y,
                                                size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                           _mm256_loadu_pd(y + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

__attribute__((target("avx2"))) double sum_avx2(const double* x, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

__attribute__((target("avx2"))) double sum_sq_diff_avx2(const double* x,
                                                        const double* y, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

__attribute__((target("avx2"))) double sum_abs_diff_avx2(const double* x,
                                                         const double* y, size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += __builtin_fabs(x[i] - y[i]);
  return s;
}

const KernelTable kAvx2Table = {scale_add_avx2, axpy_avx2,        mul_avx2,
                                dot_avx2,       sum_avx2,         sum_sq_diff_avx2,
                                sum_abs_diff_avx2, "avx2"};

}  // namespace

const KernelTable* avx2_kernels() {
  return avx2_supported() ? &kAvx2Table : nullptr;
}

}  // namespace simd
}  // namespace matkit

#else

namespace matkit {
namespace simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace simd
}  // namespace matkit

#endif
