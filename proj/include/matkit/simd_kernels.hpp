#pragma once

#include <cstddef>
#include <string>

// Elementwise / reduction kernels used by the image math paths. Each kernel
// has a scalar reference and an AVX2 variant; the active set is chosen at
// runtime (CPU probe, MATKIT_KERNELS env var, or an explicit call to
// select_kernels). The scalar reference accumulates reductions in four
// interleaved partial sums matching the AVX2 lane layout, so both variants
// return bit-identical doubles.

namespace matkit {
namespace simd {

enum class Mode { Auto, Scalar, Avx2 };

struct KernelTable {
  // out[i] = a * x[i] + b * y[i]
  void (*scale_add)(double a, const double* x, double b, const double* y,
                    double* out, size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, size_t n);
  // out[i] = x[i] * y[i]
  void (*mul)(const double* x, const double* y, double* out, size_t n);
  double (*dot)(const double* x, const double* y, size_t n);
  double (*sum)(const double* x, size_t n);
  double (*sum_sq_diff)(const double* x, const double* y, size_t n);
  double (*sum_abs_diff)(const double* x, const double* y, size_t n);
  const char* name;
};

const KernelTable& scalar_kernels();
bool avx2_supported();
// Returns null when AVX2 is unavailable on this machine.
const KernelTable* avx2_kernels();

// Active table. First use resolves Mode::Auto via the MATKIT_KERNELS env var
// ("scalar" / "avx2") and a CPU probe.
const KernelTable& kernels();
void select_kernels(Mode mode);
std::string active_kernel_name();

}  // namespace simd
}  // namespace matkit
