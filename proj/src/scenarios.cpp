#include "vbspool/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vbspool {

const char* to_string(Scenario s) { return s == Scenario::RealTime ? "real_time" : "delay_tolerant"; }

Scenario scenario_of(Discipline d) {
  return d == Discipline::PerSession ? Scenario::RealTime : Scenario::DelayTolerant;
}

double erlang_b(double a, int k) {
  if (!(a > 0.0)) throw std::invalid_argument("erlang_b: load must be positive");
  if (k < 0) throw std::invalid_argument("erlang_b: server count must be non-negative");
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = a * b / (i + a * b);
  return b;
}

ScenarioMoments realtime_moments(double a, int k) {
  if (!(a > 0.0)) throw std::invalid_argument("realtime_moments: load must be positive");
  if (k < 1) throw std::invalid_argument("realtime_moments: K must be ≥ 1");
  // Truncated Poisson law, weights relative to the mode to avoid overflow.
  std::vector<double> log_w(static_cast<std::size_t>(k) + 1, 0.0);
  for (int n = 1; n <= k; ++n) log_w[n] = log_w[n - 1] + std::log(a / n);
  double hi = log_w[0];
  for (double x : log_w) hi = std::max(hi, x);
  double z = 0.0, s1 = 0.0, s2 = 0.0;
  for (int n = 0; n <= k; ++n) {
    const double p = std::exp(log_w[n] - hi);
    z += p;
    s1 += n * p;
    s2 += static_cast<double>(n) * n * p;
  }
  ScenarioMoments out;
  out.scenario = Scenario::RealTime;
  const double blocking = erlang_b(a, k);
  out.exact.mean = s1 / z;
  out.second_moment = s2 / z;
  out.exact.variance = std::max(0.0, out.second_moment - out.exact.mean * out.exact.mean);
  out.exact.isolated_radio_blocking = blocking;
  out.approximate = ClassMoments{a, a, blocking};
  out.approximate_within_tolerance = true;
  return out;
}

namespace {
constexpr double kAuxClosedFormMargin = 0.5;
}  // namespace

GeometricSums aux_A(double a, int k) {
  if (!(a > 0.0)) throw std::invalid_argument("aux_A: load must be positive");
  if (k < 0) throw std::invalid_argument("aux_A: K must be non-negative");
  GeometricSums s;
  // The closed forms cancel catastrophically when K |1 - a| is small.
  if (std::abs(1.0 - a) > 1e-6 && std::abs(1.0 - a) * std::max(k, 1) > kAuxClosedFormMargin) {
    const double ak = std::pow(a, k);
    const double d = 1.0 - a;
    s.value = (1.0 - ak * a) / d;
    s.first = (1.0 - (k + 1.0) * ak + k * ak * a) / (d * d);
    // Second derivative of (1 - a^{K+1}) / (1 - a).
    const double akm1 = k >= 1 ? std::pow(a, k - 1) : 0.0;
    s.second = (2.0 - (k + 1.0) * k * akm1 * d * d - 2.0 * (k + 1.0) * ak * d - 2.0 * ak * a) / (d * d * d);
    if (k < 2) s.second = 0.0;
    if (k < 1) s.first = 0.0;
    return s;
  }
  double pw = 1.0;  // a^i
  for (int i = 0; i <= k; ++i) {
    s.value += pw;
    pw *= a;
  }
  pw = 1.0;  // a^{i-1}
  for (int i = 1; i <= k; ++i) {
    s.first += i * pw;
    pw *= a;
  }
  pw = 1.0;  // a^{i-2}
  for (int i = 2; i <= k; ++i) {
    s.second += static_cast<double>(i) * (i - 1) * pw;
    pw *= a;
  }
  return s;
}

ScenarioMoments delaytolerant_moments(double a, int k) {
  if (!(a > 0.0)) throw std::invalid_argument("delaytolerant_moments: load must be positive");
  if (k < 1) throw std::invalid_argument("delaytolerant_moments: K must be ≥ 1");
  ScenarioMoments out;
  out.scenario = Scenario::DelayTolerant;
  // Truncated geometric law computed from log weights so large loads are safe.
  const double log_a = std::log(a);
  const double hi = log_a > 0.0 ? k * log_a : 0.0;
  double z = 0.0, s1 = 0.0, s2 = 0.0;
  for (int n = 0; n <= k; ++n) {
    const double p = std::exp(n * log_a - hi);
    z += p;
    s1 += n * p;
    s2 += static_cast<double>(n) * n * p;
  }
  out.exact.mean = s1 / z;
  out.second_moment = s2 / z;
  out.exact.variance = std::max(0.0, out.second_moment - out.exact.mean * out.exact.mean);
  out.exact.isolated_radio_blocking = std::exp(k * log_a - hi) / z;

  if (a < 1.0) {
    const double r = a / (1.0 - a);
    out.approximate = ClassMoments{r, r + r * r, out.exact.isolated_radio_blocking};
    out.approximate_within_tolerance = static_cast<double>(k) * k * std::pow(a, k) <= kDelayTolerantTailLimit;
  }
  return out;
}

ScenarioMoments scenario_moments(const ClassSpec& spec) {
  return spec.discipline == Discipline::PerSession ? realtime_moments(spec.load(), spec.radio_servers)
                                                   : delaytolerant_moments(spec.load(), spec.radio_servers);
}

}  // namespace vbspool
