#include "matkit/simd_kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

// Scalar reference kernels. Reductions accumulate four interleaved partial
// sums and collapse them as (s0+s2) + (s1+s3), mirroring the AVX2 variant's
// lane layout and horizontal reduction, so both paths round identically.

namespace matkit {
namespace simd {

namespace {

void scale_add_scalar(double a, const double* x, double b, const double* y,
                      double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy_scalar(double a, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void mul_scalar(const double* x, const double* y, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

template <typename Term>
double reduce4(size_t n, Term term) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += term(i);
    s1 += term(i + 1);
    s2 += term(i + 2);
    s3 += term(i + 3);
  }
  double s = (s0 + s2) + (s1 + s3);
  for (; i < n; ++i) s += term(i);
  return s;
}

double dot_scalar(const double* x, const double* y, size_t n) {
  return reduce4(n, [&](size_t i) { return x[i] * y[i]; });
}

double sum_scalar(const double* x, size_t n) {
  return reduce4(n, [&](size_t i) { return x[i]; });
}

double sum_sq_diff_scalar(const double* x, const double* y, size_t n) {
  return reduce4(n, [&](size_t i) {
    double d = x[i] - y[i];
    return d * d;
  });
}

double sum_abs_diff_scalar(const double* x, const double* y, size_t n) {
  return reduce4(n, [&](size_t i) { return std::fabs(x[i] - y[i]); });
}

const KernelTable kScalarTable = {
    scale_add_scalar, axpy_scalar,         mul_scalar,         dot_scalar,
    sum_scalar,       sum_sq_diff_scalar,  sum_abs_diff_scalar, "scalar"};

const KernelTable* g_active = nullptr;

const KernelTable* resolve_auto() {
  if (const char* env = std::getenv("MATKIT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &kScalarTable;
    if (std::strcmp(env, "avx2") == 0) {
      const KernelTable* t = avx2_kernels();
      if (!t) throw std::runtime_error("MATKIT_KERNELS=avx2 but CPU lacks AVX2");
      return t;
    }
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  return &kScalarTable;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& kernels() {
  if (!g_active) g_active = resolve_auto();
  return *g_active;
}

void select_kernels(Mode mode) {
  switch (mode) {
    case Mode::Auto:
      g_active = resolve_auto();
      break;
    case Mode::Scalar:
      g_active = &kScalarTable;
      break;
    case Mode::Avx2: {
      const KernelTable* t = avx2_kernels();
      if (!t) throw std::runtime_error("AVX2 kernels unavailable on this CPU");
      g_active = t;
      break;
    }
  }
}

std::string active_kernel_name() { return kernels().name; }

}  // namespace simd
}  // namespace matkit
