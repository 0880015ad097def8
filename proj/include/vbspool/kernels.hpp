#pragma once

// Arithmetic inner loops of the recursive engine. Each kernel has a scalar
// reference implementation and, where the CPU supports it, a SIMD variant
// chosen at runtime. Variants agree to within floating-point reassociation.

#include <cstddef>
#include <cstdint>
#include <span>

namespace vbspool::kernels {

enum class Backend { Scalar, Avx2 };

const char* to_string(Backend b);

struct KernelTable {
  /// out[n] = sum_j w[j] * q[n - j] over the valid j, for n < out.size().
  /// Requires out.size() <= q.size() + w.size() - 1 and no aliasing.
  void (*convolve)(std::span<const double> q, std::span<const double> w, std::span<double> out);
  /// sum_i x[i] * y[n - 1 - i], n = x.size() == y.size().
  double (*dot_reversed)(std::span<const double> x, std::span<const double> y);
  double (*sum)(std::span<const double> x);
  void (*scale)(std::span<double> x, double factor);
};

bool backend_available(Backend b);
const KernelTable& table(Backend b);

/// The backend used by the engines. Defaults to the fastest available one;
/// the VBSPOOL_KERNEL environment variable (scalar|avx2) overrides it.
Backend active_backend();
/// Throws std::invalid_argument if the backend is not available.
void set_active_backend(Backend b);

inline const KernelTable& active() { return table(active_backend()); }

/// Number of multiply-add terms a truncated convolution evaluates.
std::uint64_t convolution_terms(std::size_t q_len, std::size_t w_len, std::size_t out_len);

namespace scalar {
void convolve(std::span<const double> q, std::span<const double> w, std::span<double> out);
double dot_reversed(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
void scale(std::span<double> x, double factor);
}  // namespace scalar

#if defined(VBSPOOL_HAVE_AVX2)
namespace avx2 {
void convolve(std::span<const double> q, std::span<const double> w, std::span<double> out);
double dot_reversed(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
void scale(std::span<double> x, double factor);
}  // namespace avx2
#endif

}  // namespace vbspool::kernels
