#pragma once

// Dense double-precision kernels used by the network hot loops.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2+FMA
// variant compiled in its own translation unit. The variant is chosen once at
// startup from CPUID (override with HAMLEARN_KERNELS=scalar|avx2) and can be
// switched explicitly for equivalence testing.

#include <cstddef>
#include <span>
#include <string_view>

namespace hamlearn::kernels {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  // C[m x n] += A[m x k] * B[k x n]; all row-major with explicit leading dims.
  void (*gemm_acc)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                   const double* b, std::size_t ldb, double* c, std::size_t ldc);
  void (*sigmoid)(const double* x, double* y, std::size_t n);
  void (*tanh)(const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(HAMLEARN_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

bool backend_supported(Backend b);
const KernelTable& table(Backend b);
std::string_view backend_name(Backend b);

/// Kernels selected for this process.
const KernelTable& active();
Backend active_backend();
/// Throws std::invalid_argument if the CPU lacks the backend.
void set_backend(Backend b);

// Span conveniences over the active table.
inline void sigmoid(std::span<const double> x, std::span<double> y) {
  active().sigmoid(x.data(), y.data(), x.size());
}
inline void tanh(std::span<const double> x, std::span<double> y) {
  active().tanh(x.data(), y.data(), x.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace hamlearn::kernels
