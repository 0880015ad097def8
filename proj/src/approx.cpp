#include "vbspool/approx.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vbspool/recursive.hpp"

namespace vbspool {

const char* to_string(MomentSource s) { return s == MomentSource::Exact ? "exact" : "closed-form"; }

const char* to_string(Regime r) {
  switch (r) {
    case Regime::SmallPool:
      return "small_pool";
    case Regime::LargePool:
      return "large_pool";
    case Regime::Transitional:
      break;
  }
  return "transitional";
}

std::vector<ClassMoments> class_moments(const PoolConfig& config, MomentSource source) {
  std::vector<ClassMoments> out;
  out.reserve(config.num_classes());
  for (std::size_t v = 0; v < config.num_classes(); ++v) {
    const auto sm = scenario_moments(config.classes[v]);
    if (source == MomentSource::Exact) {
      out.push_back(sm.exact);
    } else if (sm.approximate && sm.approximate_within_tolerance) {
      out.push_back(*sm.approximate);
    } else {
      throw std::domain_error("class " + std::to_string(v + 1) +
                              ": closed-form moments need a < 1 and K^2 a^K <= 1e-3");
    }
  }
  return out;
}

PoolMoments pool_moments(const PoolConfig& config, const std::vector<ClassMoments>& moments, long n) {
  if (moments.size() != config.num_classes()) throw std::invalid_argument("pool_moments: one ClassMoments per class");
  if (n < 1) throw std::invalid_argument("pool_moments: n must be ≥ 1");
  PoolMoments pm;
  pm.pool_size = config.pool_size();
  pm.compute_servers = n;
  const double size = static_cast<double>(pm.pool_size);
  for (std::size_t v = 0; v < moments.size(); ++v) {
    const double beta = config.classes[v].count / size;
    pm.class_fractions.push_back(beta);
    pm.pooled_mean += beta * moments[v].mean;
    pm.pooled_variance += moments[v].variance;
  }
  if (!(pm.pooled_variance > 0.0)) throw std::domain_error("degenerate pool variance");
  pm.normalized_compute = (n - size * pm.pooled_mean) / (std::sqrt(size) * std::sqrt(pm.pooled_variance));
  return pm;
}

double computational_term(long pool_size, double sigma_sq, double alpha) {
  return 1.0 / (std::sqrt(2.0 * std::numbers::pi * pool_size * sigma_sq) * std::expm1(0.5 * alpha * alpha));
}

BlockingReport blocking_approx(const PoolConfig& config, const PoolMoments& pm,
                               const std::vector<ClassMoments>& moments) {
  if (!(pm.normalized_compute > 0.0)) throw std::domain_error("approximation valid only for N > |M|μ");
  BlockingReport r;
  r.method = Method::Approximate;
  r.computational = computational_term(pm.pool_size, pm.pooled_variance, pm.normalized_compute);
  for (std::size_t v = 0; v < config.num_classes(); ++v) {
    r.per_class_radio.push_back(moments[v].isolated_radio_blocking);
    r.per_class_overall.push_back(r.computational + moments[v].isolated_radio_blocking);
  }
  return r;
}

UtilizationLimit utilization_limit(const PoolConfig& config, const PoolMoments& pm) {
  return {pm.pool_size * pm.pooled_mean / pm.compute_servers, pm.compute_servers >= config.total_radio_servers()};
}

double residual_gain(const PoolConfig& config, const PoolMoments& pm, long n) {
  const double total = static_cast<double>(config.total_radio_servers());
  return (n - pm.pool_size * pm.pooled_mean) / total;
}

double knee_alpha(long pool_size, double sigma_sq, double delta) {
  if (pool_size < 1 || !(sigma_sq > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("knee_alpha: needs pool_size ≥ 1, sigma² > 0, delta > 0");
  const double x = std::sqrt(2.0 * std::numbers::pi * pool_size * sigma_sq * delta * delta);
  return std::sqrt(2.0 * std::log1p(1.0 / x));
}

KneeApprox knee_servers_approx(const PoolConfig& config, const PoolMoments& pm, double delta) {
  KneeApprox k;
  const double size = static_cast<double>(pm.pool_size);
  const double sigma = std::sqrt(pm.pooled_variance);
  const double total = static_cast<double>(config.total_radio_servers());
  k.alpha = knee_alpha(pm.pool_size, pm.pooled_variance, delta);
  const double target = size * pm.pooled_mean + k.alpha * std::sqrt(size) * sigma;
  k.servers = static_cast<long>(std::ceil(target - 1e-9 * target));
  k.gain = (k.servers - size * pm.pooled_mean) / total;
  k.gain_continuous = k.alpha * std::sqrt(size) * sigma / total;
  k.bracket_low = k.alpha * sigma / (std::sqrt(size) * config.max_radio_servers());
  k.bracket_high = k.alpha * sigma / (std::sqrt(size) * config.min_radio_servers());
  const double slack = 1e-12 * k.bracket_high;
  k.within_bracket = k.gain_continuous >= k.bracket_low - slack && k.gain_continuous <= k.bracket_high + slack;
  return k;
}

long knee_servers_exact(const PoolConfig& config, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("knee_servers_exact: delta must be positive");
  std::vector<double> floor_br;
  for (const auto& c : config.classes) floor_br.push_back(scenario_moments(c).exact.isolated_radio_blocking);
  PoolConfig probe = config;
  auto ok = [&](long n) {
    probe.compute_servers = static_cast<int>(n);
    const auto r = blocking_recursive(probe);
    for (std::size_t v = 0; v < floor_br.size(); ++v)
      if (r.per_class_overall[v] > floor_br[v] + delta) return false;
    return true;
  };
  long lo = 1, hi = config.total_radio_servers();
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (ok(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

RegimeReport scaling_regime(long pool_size, double sigma_sq, double delta) {
  RegimeReport r;
  r.indicator = std::sqrt(2.0 * std::numbers::pi * pool_size * sigma_sq * delta * delta);
  if (r.indicator < kSmallPoolThreshold)
    r.regime = Regime::SmallPool;
  else if (r.indicator > kLargePoolThreshold)
    r.regime = Regime::LargePool;
  else
    r.regime = Regime::Transitional;
  // g_r* is proportional to alpha* / sqrt(|M|) at fixed K and sigma.
  const double a1 = knee_alpha(pool_size, sigma_sq, delta);
  const double a2 = knee_alpha(2 * pool_size, sigma_sq, delta);
  r.exponent = std::log2(a2 / a1) - 0.5;
  return r;
}

GainReport gain_report(const PoolConfig& config, const std::vector<ClassMoments>& moments, double delta) {
  GainReport g;
  g.delta = delta;
  const auto pm = pool_moments(config, moments, config.compute_servers);
  PoolConfig full = config;
  full.compute_servers = static_cast<int>(config.total_radio_servers());
  const auto pm_full = pool_moments(full, moments, full.compute_servers);
  const auto u = utilization_limit(full, pm_full);
  g.utilization_limit = u.value;
  g.utilization_precondition = u.precondition_holds;
  g.residual_gain = residual_gain(config, pm, config.compute_servers);
  const auto k = knee_servers_approx(config, pm, delta);
  g.knee_alpha = k.alpha;
  g.knee_servers = k.servers;
  g.knee_gain = k.gain;
  g.knee_gain_low = k.bracket_low;
  g.knee_gain_high = k.bracket_high;
  g.regime = scaling_regime(pm.pool_size, pm.pooled_variance, delta);
  return g;
}

}  // namespace vbspool
