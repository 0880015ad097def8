#pragma once

// Single-VBS occupancy statistics for the two traffic scenarios: real-time
// (per-session departures, truncated Poisson occupancy) and delay-tolerant
// (shared capacity, truncated geometric occupancy).

#include <optional>

#include "vbspool/model.hpp"

namespace vbspool {

/// First and second order statistics of one isolated VBS (N >= M^T K).
struct ClassMoments {
  double mean = 0.0;
  double variance = 0.0;
  double isolated_radio_blocking = 0.0;
};

enum class Scenario { RealTime, DelayTolerant };
const char* to_string(Scenario s);
Scenario scenario_of(Discipline d);

struct ScenarioMoments {
  ClassMoments exact;
  /// Closed-form approximation; empty when it is undefined (a >= 1 in the
  /// delay-tolerant scenario).
  std::optional<ClassMoments> approximate;
  /// False when the dropped terms exceed the tolerance (K^2 a^K > 1e-3);
  /// consumers asking for closed-form moments are refused then.
  bool approximate_within_tolerance = false;
  /// E[U^2] of the exact law.
  double second_moment = 0.0;
  Scenario scenario = Scenario::RealTime;
};

/// Erlang-B blocking probability via B(0) = 1, B(k) = a B(k-1) / (k + a B(k-1)).
double erlang_b(double a, int k);

ScenarioMoments realtime_moments(double a, int k);

struct GeometricSums {
  double value = 0.0;   // A(a, K)  = sum_{i=0..K} a^i
  double first = 0.0;   // A'(a, K) = sum_{i=1..K} i a^{i-1}
  double second = 0.0;  // A''(a,K) = sum_{i=2..K} i (i-1) a^{i-2}
};

/// Closed forms away from a = 1, direct summation within K |1 - a| <= 0.5.
GeometricSums aux_A(double a, int k);

/// Gate on the delay-tolerant closed forms: they need a < 1 and
/// K^2 a^K at most this value.
inline constexpr double kDelayTolerantTailLimit = 1e-3;

ScenarioMoments delaytolerant_moments(double a, int k);

/// Dispatches on the discipline of the class.
ScenarioMoments scenario_moments(const ClassSpec& spec);

}  // namespace vbspool
