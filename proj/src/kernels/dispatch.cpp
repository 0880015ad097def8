#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vbspool/kernels.hpp"

namespace vbspool::kernels {

namespace {

constexpr KernelTable kScalar{&scalar::convolve, &scalar::dot_reversed, &scalar::sum, &scalar::scale};
#if defined(VBSPOOL_HAVE_AVX2)
constexpr KernelTable kAvx2{&avx2::convolve, &avx2::dot_reversed, &avx2::sum, &avx2::scale};
#endif

bool cpu_has_avx2() {
#if defined(VBSPOOL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("VBSPOOL_KERNEL")) {
    const std::string_view name(env);
    if (name == "scalar") return Backend::Scalar;
    if (name == "avx2" && cpu_has_avx2()) return Backend::Avx2;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

const char* to_string(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) { return b == Backend::Scalar || cpu_has_avx2(); }

const KernelTable& table(Backend b) {
#if defined(VBSPOOL_HAVE_AVX2)
  if (b == Backend::Avx2 && cpu_has_avx2()) return kAvx2;
#endif
  if (b != Backend::Scalar) throw std::invalid_argument(std::string("kernel backend unavailable: ") + to_string(b));
  return kScalar;
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_active_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument(std::string("kernel backend unavailable: ") + to_string(b));
  current().store(b, std::memory_order_relaxed);
}

std::uint64_t convolution_terms(std::size_t q_len, std::size_t w_len, std::size_t out_len) {
  std::uint64_t terms = 0;
  for (std::size_t n = 0; n < out_len; ++n) {
    const std::size_t lo = n + 1 > q_len ? n + 1 - q_len : 0;
    const std::size_t hi = std::min(w_len - 1, n);
    if (hi >= lo) terms += hi - lo + 1;
  }
  return terms;
}

}  // namespace vbspool::kernels
