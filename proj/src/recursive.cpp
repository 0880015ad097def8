#include "vbspool/recursive.hpp"

#include <algorithm>
#include <cmath>

#include "numeric.hpp"
#include "vbspool/kernels.hpp"

namespace vbspool {

namespace {

struct Counter {
  std::uint64_t ops = 0;
};

// One VBS folded into a distribution: out = (dist * w) truncated at cap,
// renormalized to unit sum.
OccupancyDistribution fold(const OccupancyDistribution& dist, bool dist_is_unit, const SingleVbsWeights& w,
                           long cap, Counter& counter) {
  const auto& k = kernels::active();
  OccupancyDistribution out;
  out.included = dist.included;
  const std::size_t len =
      static_cast<std::size_t>(std::min<long>(cap, static_cast<long>(dist.weights.size() + w.size()) - 2)) + 1;
  out.weights.assign(len, 0.0);
  if (dist_is_unit) {
    std::copy_n(w.scaled.begin(), std::min(len, w.size()), out.weights.begin());
    out.log_scale = dist.log_scale + w.log_scale;
  } else {
    k.convolve(dist.weights, w.scaled, out.weights);
    counter.ops += kernels::convolution_terms(dist.weights.size(), w.size(), len);
    out.log_scale = dist.log_scale + w.log_scale;
  }
  const double mass = k.sum(out.weights);
  if (mass > 0.0) {
    k.scale(out.weights, 1.0 / mass);
    out.log_scale += std::log(mass);
  }
  return out;
}

// Prefix sums of x, extended with the full sum up to `len` entries.
std::vector<double> cumulative(const std::vector<double>& x, std::size_t len, Counter& counter) {
  std::vector<double> c(len);
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    if (i < x.size()) {
      acc += x[i];
      if (i > 0) ++counter.ops;
    }
    c[i] = acc;
  }
  return c;
}

// sum_{a <= last} x[a] * y[last - a], clipped to the support of x. A unit x
// (the empty multiset) makes this a lookup.
double convolve_at(const std::vector<double>& x, bool x_unit, const std::vector<double>& y, std::size_t last,
                   std::size_t y_support, Counter& counter) {
  if (x_unit) return last < y_support ? y[last] : 0.0;
  // y is zero beyond y_support - 1, so a >= last - (y_support - 1).
  const std::size_t lo = last + 1 > y_support ? last + 1 - y_support : 0;
  const std::size_t hi = std::min(last, x.size() - 1);
  if (hi < lo) return 0.0;
  const std::size_t n = hi - lo + 1;
  counter.ops += n;
  return kernels::active().dot_reversed(std::span(x).subspan(lo, n), std::span(y).subspan(last - hi, n));
}

}  // namespace

double OccupancyDistribution::log_weight(std::size_t n) const {
  if (n >= weights.size() || weights[n] <= 0.0) return detail::kNegInf;
  return std::log(weights[n]) + log_scale;
}

OccupancyDistribution occupancy_distribution(const PoolConfig& config, std::optional<std::size_t> exclude,
                                             long cap) {
  if (cap < 0) throw std::invalid_argument("occupancy_distribution: cap must be ≥ 0");
  if (exclude && *exclude >= config.classes.size())
    throw std::out_of_range("occupancy_distribution: excluded class out of range");
  Counter counter;
  OccupancyDistribution dist;
  dist.included.assign(config.classes.size(), 0);
  bool unit = true;
  for (std::size_t v = 0; v < config.classes.size(); ++v) {
    const int count = config.classes[v].count - (exclude == v ? 1 : 0);
    if (count <= 0) continue;
    const SingleVbsWeights w = single_vbs_weights(config.classes[v]);
    for (int m = 0; m < count; ++m) {
      dist = fold(dist, unit, w, cap, counter);
      unit = false;
    }
    dist.included[v] = count;
  }
  return dist;
}

double compute_C(const PoolConfig& config, long n, std::optional<std::size_t> exclude) {
  if (n < 0) return detail::kNegInf;
  return occupancy_distribution(config, exclude, n).log_weight(static_cast<std::size_t>(n));
}

double compute_R(const PoolConfig& config, long n, std::optional<std::size_t> exclude) {
  if (n <= 0) return detail::kNegInf;
  const OccupancyDistribution dist = occupancy_distribution(config, exclude, n - 1);
  double total = 0.0;
  for (double x : dist.weights) total += x;
  return total > 0.0 ? std::log(total) + dist.log_scale : detail::kNegInf;
}

RecursiveResult evaluate_recursive(const PoolConfig& config) {
  const std::size_t num_classes = config.classes.size();
  const long budget = config.compute_servers;
  const bool decoupled = budget > config.total_radio_servers();
  Counter counter;

  std::vector<SingleVbsWeights> w;
  for (const auto& c : config.classes) w.push_back(single_vbs_weights(c));

  BlockingReport report;
  report.method = Method::Recursive;
  if (decoupled) {
    // Truncation never binds, so the VBSs are independent: no computational
    // blocking, and radio blocking is the isolated single-VBS value.
    for (std::size_t v = 0; v < num_classes; ++v) {
      const double p = w[v].scaled[static_cast<std::size_t>(config.classes[v].radio_servers)];
      report.per_class_radio.push_back(p);
      report.per_class_overall.push_back(p);
    }
    return {std::move(report), 0};
  }

  // base: every VBS except one of each class.
  OccupancyDistribution base;
  bool base_unit = true;
  for (std::size_t v = 0; v < num_classes; ++v) {
    for (int m = 1; m < config.classes[v].count; ++m) {
      base = fold(base, base_unit, w[v], budget, counter);
      base_unit = false;
    }
  }
  // prefix[v]: base plus the spare VBS of classes 0..v-1; it lacks exactly
  // one VBS of each class v..V-1.
  std::vector<OccupancyDistribution> prefix{base};
  std::vector<bool> prefix_unit{base_unit};
  for (std::size_t v = 0; v + 1 < num_classes; ++v) {
    prefix.push_back(fold(prefix.back(), prefix_unit.back(), w[v], budget, counter));
    prefix_unit.push_back(false);
  }

  // Full pool = prefix[V-1] * w[V-1]; only its mass up to N and its weight
  // at N are needed, so the last fold reduces to two dot products.
  const std::size_t last = num_classes - 1;
  const OccupancyDistribution& almost = prefix[last];
  const double log_full_scale = almost.log_scale + w[last].log_scale;
  const auto n_budget = static_cast<std::size_t>(budget);
  const std::vector<double> cum_last = cumulative(w[last].scaled, n_budget + 1, counter);
  // R(N + 1, M) and C(N, M), in the scale of the full pool
  const bool almost_unit = prefix_unit[last];
  const double mass_below_budget =
      convolve_at(almost.weights, almost_unit, cum_last, n_budget, n_budget + 1, counter);
  const double at_budget =
      convolve_at(almost.weights, almost_unit, w[last].scaled, n_budget, w[last].size(), counter);

  // suffix[v]: one spare VBS of each class v..V-1, truncated where class
  // v-1 and below can still use it.
  std::vector<OccupancyDistribution> suffix(num_classes + 1);
  std::vector<bool> suffix_unit(num_classes + 1, true);
  for (std::size_t v = last; v >= 1; --v) {
    int min_k = config.classes[0].radio_servers;
    for (std::size_t u = 0; u < v; ++u) min_k = std::min(min_k, config.classes[u].radio_servers);
    const long cap = budget - min_k - 1;
    if (cap < 0) break;
    suffix[v] = fold(suffix[v + 1], suffix_unit[v + 1], w[v], cap, counter);
    suffix_unit[v] = false;
  }

  report.computational = at_budget / mass_below_budget;
  const double log_norm = std::log(mass_below_budget) + log_full_scale;
  for (std::size_t v = 0; v < num_classes; ++v) {
    const long k = config.classes[v].radio_servers;
    const long t = budget - k;  // R(N - K_v, M - e_v)
    double p_radio = 0.0;
    if (t > 0) {
      // Q_{-v} = prefix[v] * suffix[v+1]
      double mass;
      double log_scale = prefix[v].log_scale + suffix[v + 1].log_scale;
      if (suffix_unit[v + 1]) {
        const auto& p = prefix[v].weights;
        const std::size_t n = std::min<std::size_t>(t, p.size());
        mass = kernels::active().sum(std::span(p).first(n));
        counter.ops += n - 1;
      } else {
        const auto tt = static_cast<std::size_t>(t);
        const std::vector<double> cum = cumulative(suffix[v + 1].weights, tt, counter);
        mass = convolve_at(prefix[v].weights, prefix_unit[v], cum, tt - 1, tt, counter);
      }
      if (mass > 0.0)
        p_radio = std::exp(w[v].log_weight(static_cast<std::size_t>(k)) + std::log(mass) + log_scale - log_norm);
    }
    report.per_class_radio.push_back(p_radio);
    report.per_class_overall.push_back(p_radio + report.computational);
  }
  return {std::move(report), counter.ops};
}

BlockingReport blocking_recursive(const PoolConfig& config) { return evaluate_recursive(config).report; }

std::uint64_t operation_count(const PoolConfig& config) { return evaluate_recursive(config).operations; }

std::uint64_t operation_bound(const PoolConfig& config) {
  const auto k = static_cast<std::uint64_t>(config.max_radio_servers());
  const auto m = static_cast<std::uint64_t>(config.pool_size());
  return (k * k + k) * m * m;
}

}  // namespace vbspool
