#pragma once

// Discrete-event simulation of the admission-controlled pool. Blocking is
// measured by counting what arriving sessions see.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vbspool/model.hpp"

namespace vbspool {

/// Session service-demand law; all three have mean 1/mu.
enum class ServiceLaw {
  Exponential,
  Erlang2,
  Hyperexponential,  // two-branch, balanced means, squared CV 4
};
const char* to_string(ServiceLaw s);

inline constexpr double kHyperexpScv = 4.0;
inline constexpr const char* kGeneratorName = "mt19937_64";

struct SimConfig {
  PoolConfig pool;
  /// Discarded simulated time; defaults to 10 / min mu_v.
  std::optional<double> warmup_time;
  double horizon_time = 0.0;
  std::uint64_t seed = 1;
  int replications = 1;
  ServiceLaw service = ServiceLaw::Exponential;
};

double default_warmup(const PoolConfig& pool);

/// Seed of replication r, derived from the master seed by splitmix64.
std::uint64_t replication_seed(std::uint64_t seed, int r);

struct ReplicationStats {
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> offered;
  std::vector<std::uint64_t> blocked_radio;
  std::vector<std::uint64_t> blocked_compute;
  /// Counted over the whole run including warmup, for conservation checks.
  std::vector<std::uint64_t> admitted;
  std::vector<std::uint64_t> departed;
  std::vector<std::uint64_t> final_occupancy;
  double mean_utilization = 0.0;
  std::vector<double> occupancy_time;  // time spent at each total
  double measured_time = 0.0;
  std::uint64_t events = 0;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;    // binomial sqrt(p (1 - p) / n)
  double half_width = 0.0;   // 95% normal interval
};

struct ClassEstimates {
  Estimate radio;
  Estimate compute;
  Estimate overall;
};

struct SimStats {
  std::vector<std::uint64_t> offered;
  std::vector<std::uint64_t> blocked_radio;
  std::vector<std::uint64_t> blocked_compute;
  std::vector<ClassEstimates> blocking_estimates;
  double mean_utilization = 0.0;
  /// Time-weighted law of the total session count, 0..min(N, M^T K).
  std::vector<double> occupancy_histogram;
  double measured_time = 0.0;
  std::vector<ReplicationStats> replications;
  std::uint64_t seed = 0;
  double warmup_time = 0.0;
  double horizon_time = 0.0;
  ServiceLaw service = ServiceLaw::Exponential;
};

/// One replication, strictly sequential.
ReplicationStats simulate_replication(const SimConfig& cfg, std::uint64_t seed);

/// All replications, run concurrently; the result depends only on cfg.
SimStats simulate(const SimConfig& cfg);

/// Total-variation distance between the simulated occupancy histogram and an
/// analytic law of the total session count. Throws std::invalid_argument on
/// a length mismatch and std::runtime_error("no samples") for an empty run.
double occupancy_check(const SimStats& stats, const std::vector<double>& marginal);

struct UtilizationEstimate {
  double mean = 0.0;
  double half_width = 0.0;  // Student-t over replications; inf for one
  int replications = 0;
};

UtilizationEstimate utilization_estimate(const SimStats& stats, double confidence = 0.95);

}  // namespace vbspool
