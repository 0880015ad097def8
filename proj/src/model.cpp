#include "vbspool/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "numeric.hpp"

namespace vbspool {

const char* to_string(Discipline d) {
  switch (d) {
    case Discipline::PerSession:
      return "per_session";
    case Discipline::SharedCapacity:
      return "shared";
  }
  return "unknown";
}

long PoolConfig::pool_size() const {
  long total = 0;
  for (const auto& c : classes) total += c.count;
  return total;
}

long PoolConfig::total_radio_servers() const {
  long total = 0;
  for (const auto& c : classes) total += static_cast<long>(c.count) * c.radio_servers;
  return total;
}

int PoolConfig::max_radio_servers() const {
  int k = 0;
  for (const auto& c : classes) k = std::max(k, c.radio_servers);
  return k;
}

int PoolConfig::min_radio_servers() const {
  int k = std::numeric_limits<int>::max();
  for (const auto& c : classes) k = std::min(k, c.radio_servers);
  return classes.empty() ? 0 : k;
}

PoolConfig validate_config(const PoolConfig& raw) {
  if (raw.classes.empty()) throw ConfigError("pool must contain at least one class");
  for (std::size_t v = 0; v < raw.classes.size(); ++v) {
    const auto& c = raw.classes[v];
    const std::string where = "class " + std::to_string(v + 1) + ": ";
    if (c.count < 1) throw ConfigError(where + "count must be ≥ 1");
    if (c.radio_servers < 1) throw ConfigError(where + "radio_servers must be ≥ 1");
    if (!(c.arrival_rate > 0.0) || !std::isfinite(c.arrival_rate))
      throw ConfigError(where + "arrival_rate must be positive and finite");
    if (!(c.service_rate > 0.0) || !std::isfinite(c.service_rate))
      throw ConfigError(where + "service_rate must be positive and finite");
    const double a = c.load();
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError(where + "traffic load must be positive and finite");
  }
  if (raw.compute_servers < 1) throw ConfigError("compute_servers must be ≥ 1");
  return raw;
}

double service_rate(const ClassSpec& spec, int n) {
  if (n < 1 || n > spec.radio_servers)
    throw std::out_of_range("service_rate: occupancy " + std::to_string(n) + " outside [1, " +
                            std::to_string(spec.radio_servers) + "]");
  return spec.discipline == Discipline::PerSession ? n * spec.service_rate : spec.service_rate;
}

SingleVbsWeights single_vbs_weights(const ClassSpec& spec) {
  const int k = spec.radio_servers;
  SingleVbsWeights w;
  w.log_weights.resize(static_cast<std::size_t>(k) + 1);
  w.log_weights[0] = 0.0;
  const double log_lambda = std::log(spec.arrival_rate);
  for (int n = 1; n <= k; ++n)
    w.log_weights[n] = w.log_weights[n - 1] + log_lambda - std::log(service_rate(spec, n));
  w.log_scale = detail::log_sum_exp(w.log_weights);
  w.scaled.resize(w.log_weights.size());
  for (std::size_t n = 0; n < w.scaled.size(); ++n) w.scaled[n] = std::exp(w.log_weights[n] - w.log_scale);
  return w;
}

std::uint64_t state_space_size(const PoolConfig& config) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const auto cap = static_cast<std::size_t>(config.compute_servers);
  auto sat_add = [](std::uint64_t a, std::uint64_t b) { return a > kMax - b ? kMax : a + b; };

  // counts[n] = number of partial states with n sessions so far
  std::vector<std::uint64_t> counts{1};
  for (const auto& c : config.classes) {
    for (int m = 0; m < c.count; ++m) {
      const std::size_t len = std::min(cap, counts.size() - 1 + static_cast<std::size_t>(c.radio_servers)) + 1;
      std::vector<std::uint64_t> next(len, 0);
      // next[n] = sum_{j=0..K} counts[n-j]: sliding window over counts
      std::uint64_t window = 0;
      bool saturated = false;
      for (std::size_t n = 0; n < len; ++n) {
        if (n < counts.size()) {
          window = sat_add(window, counts[n]);
          if (window == kMax) saturated = true;
        }
        if (n >= static_cast<std::size_t>(c.radio_servers) + 1) {
          const std::size_t drop = n - c.radio_servers - 1;
          if (drop < counts.size() && !saturated) window -= counts[drop];
        }
        next[n] = window;
      }
      counts = std::move(next);
    }
  }
  std::uint64_t total = 0;
  for (auto x : counts) total = sat_add(total, x);
  return total;
}

std::vector<ClassRange> class_ranges(const PoolConfig& config) {
  std::vector<ClassRange> out;
  std::size_t pos = 0;
  for (const auto& c : config.classes) {
    out.push_back({pos, pos + static_cast<std::size_t>(c.count)});
    pos += c.count;
  }
  return out;
}

}  // namespace vbspool
