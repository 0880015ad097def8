#pragma once

// Brute-force ground truth: enumerates the admissible state space and sums
// the product-form stationary distribution directly.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbspool/model.hpp"

namespace vbspool {

/// u_{v,m} in class-major order.
using StateVector = std::vector<int>;

enum class Method { Exact, Recursive, Approximate, Simulated };
const char* to_string(Method m);

struct BlockingReport {
  std::vector<double> per_class_radio;    // P_v^br
  double computational = 0.0;             // P^bc
  std::vector<double> per_class_overall;  // P_v^b
  Method method = Method::Exact;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Raised when the state space is larger than the enumeration cap.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  EnumerationCapExceeded(std::uint64_t size, std::uint64_t cap);
  std::uint64_t size() const { return size_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t size_;
  std::uint64_t cap_;
};

/// Visits every admissible state once, in lexicographic order. Throws
/// EnumerationCapExceeded before visiting anything if the space is too big.
void for_each_state(const PoolConfig& config, const std::function<void(const StateVector&)>& visit,
                    std::uint64_t cap = kDefaultEnumerationCap);

std::vector<StateVector> enumerate_states(const PoolConfig& config, std::uint64_t cap = kDefaultEnumerationCap);

bool is_admissible(const PoolConfig& config, const StateVector& state);

/// log of the unnormalized product-form weight of an admissible state.
double unnormalized_log_weight(const PoolConfig& config, const StateVector& state);

struct StationaryDistribution {
  std::vector<StateVector> states;  // lexicographic order
  std::vector<double> probabilities;
  double zero_state_prob = 0.0;  // P_0

  /// Probability of the state, or 0 for a state outside the support.
  double probability(const StateVector& state) const;
  std::size_t index_of(const StateVector& state) const;  // size() if absent
  std::size_t size() const { return states.size(); }
};

StationaryDistribution stationary_distribution(const PoolConfig& config,
                                               std::uint64_t cap = kDefaultEnumerationCap);

BlockingReport blocking_exact(const PoolConfig& config, std::uint64_t cap = kDefaultEnumerationCap);

/// Marginal law of the total number of sessions, indexed 0..min(N, M^T K).
std::vector<double> total_occupancy_marginal(const StationaryDistribution& dist);

// Reversibility checks ------------------------------------------------------

/// Transition rate for changing entry `entry` of `from` by `direction`
/// (+1 arrival, -1 departure). Only called for admissible neighbours.
using RateFunction = std::function<double(const StateVector& from, std::size_t entry, int direction)>;

/// The rates of the admission-controlled pool.
RateFunction pool_rates(const PoolConfig& config);

struct BalanceCheck {
  bool holds = false;
  double worst_residual = 0.0;
};

/// |Pr{u} lambda_v - Pr{u + e} f_v(u_{v,m} + 1)| over every admissible
/// neighbour pair, against `tolerance`.
BalanceCheck check_local_balance(const PoolConfig& config, double tolerance);
BalanceCheck check_local_balance(const PoolConfig& config, const StationaryDistribution& dist, double tolerance);

struct CycleProducts {
  double forward = 1.0;
  double reverse = 1.0;
};

/// Products of rates around a closed loop of neighbouring states (first
/// state is not repeated at the end) in both directions.
CycleProducts cycle_rate_products(const std::vector<StateVector>& loop, const RateFunction& rates);

struct CycleCheck {
  bool holds = false;
  std::size_t cycles = 0;
  double worst_relative = 0.0;
};

inline constexpr double kCycleTolerance = 1e-10;

/// Samples random closed loops in the state graph and compares forward and
/// reverse rate products. Deterministic given the seed.
CycleCheck check_kolmogorov_cycles(const PoolConfig& config, std::size_t num_cycles, std::uint64_t seed);
CycleCheck check_kolmogorov_cycles(const PoolConfig& config, std::size_t num_cycles, std::uint64_t seed,
                                   const RateFunction& rates);

}  // namespace vbspool
