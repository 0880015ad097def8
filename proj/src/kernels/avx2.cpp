#include <immintrin.h>

#include <algorithm>

#include "vbspool/kernels.hpp"

namespace vbspool::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double convolve_one(std::span<const double> q, std::span<const double> w, std::size_t n) {
  const std::size_t lo = n + 1 > q.size() ? n + 1 - q.size() : 0;
  const std::size_t hi = std::min(w.size() - 1, n);
  double acc = 0.0;
  for (std::size_t j = lo; j <= hi; ++j) acc += w[j] * q[n - j];
  return acc;
}

}  // namespace

void convolve(std::span<const double> q, std::span<const double> w, std::span<double> out) {
  const std::size_t lq = q.size();
  const std::size_t lw = w.size();
  const std::size_t len = out.size();
  // Outputs in [lw-1, lq-1] see every tap; those are done four at a time.
  const std::size_t body_begin = std::min(lw - 1, len);
  const std::size_t body_end = std::min(lq, len);
  std::size_t n = 0;
  for (; n < body_begin; ++n) out[n] = convolve_one(q, w, n);
  for (; n + 4 <= body_end; n += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < lw; ++j) {
      const __m256d tap = _mm256_broadcast_sd(&w[j]);
      acc = _mm256_fmadd_pd(tap, _mm256_loadu_pd(&q[n - j]), acc);
    }
    _mm256_storeu_pd(&out[n], acc);
  }
  for (; n < len; ++n) out[n] = convolve_one(q, w, n);
}

double dot_reversed(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // y[n-1-i-3 .. n-1-i] reversed to line up with x[i .. i+3]
    const __m256d yv = _mm256_permute4x64_pd(_mm256_loadu_pd(&y[n - 4 - i]), 0x1B);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), yv, acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += x[i] * y[n - 1 - i];
  return total;
}

double sum(std::span<const double> x) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= x.size(); i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(&x[i]));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(&x[i + 4]));
  }
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < x.size(); ++i) total += x[i];
  return total;
}

void scale(std::span<double> x, double factor) {
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) _mm256_storeu_pd(&x[i], _mm256_mul_pd(_mm256_loadu_pd(&x[i]), f));
  for (; i < x.size(); ++i) x[i] *= factor;
}

}  // namespace vbspool::kernels::avx2
