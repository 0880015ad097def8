#include <algorithm>

#include "vbspool/kernels.hpp"

namespace vbspool::kernels::scalar {

void convolve(std::span<const double> q, std::span<const double> w, std::span<double> out) {
  const std::size_t lq = q.size();
  const std::size_t lw = w.size();
  for (std::size_t n = 0; n < out.size(); ++n) {
    const std::size_t lo = n + 1 > lq ? n + 1 - lq : 0;
    const std::size_t hi = std::min(lw - 1, n);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += w[j] * q[n - j];
    out[n] = acc;
  }
}

double dot_reversed(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[n - 1 - i];
  return acc;
}

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

void scale(std::span<double> x, double factor) {
  for (double& v : x) v *= factor;
}

}  // namespace vbspool::kernels::scalar
