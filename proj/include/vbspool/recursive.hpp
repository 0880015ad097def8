#pragma once

// Scalable blocking evaluation through the auxiliary functions C(n, M)
// (occupancy weight at exactly n sessions) and R(n, M) (weight strictly
// below n), realized as truncated convolutions of single-VBS weights.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "vbspool/exact.hpp"
#include "vbspool/model.hpp"

namespace vbspool {

struct OccupancyDistribution {
  /// weights[n] * exp(log_scale) is the unnormalized weight of n sessions.
  /// weights sums to 1 unless every included weight vanished.
  std::vector<double> weights{1.0};
  double log_scale = 0.0;
  std::vector<int> included;  // VBS count per class

  double log_weight(std::size_t n) const;
};

/// Convolves the weights of every VBS (less one VBS of class `exclude`, a
/// 0-based index) and truncates at total `cap`.
OccupancyDistribution occupancy_distribution(const PoolConfig& config, std::optional<std::size_t> exclude,
                                             long cap);

/// log C(n, M) or log C(n, M - e_v); -inf when no state has n sessions.
double compute_C(const PoolConfig& config, long n, std::optional<std::size_t> exclude = std::nullopt);
/// log R(n, M) or log R(n, M - e_v); R(0) = 0, i.e. -inf.
double compute_R(const PoolConfig& config, long n, std::optional<std::size_t> exclude = std::nullopt);

struct RecursiveResult {
  BlockingReport report;
  /// Multiply-add terms of the convolutions, dot products and running sums
  /// the evaluation executed; renormalization is not counted.
  std::uint64_t operations = 0;
};

RecursiveResult evaluate_recursive(const PoolConfig& config);
BlockingReport blocking_recursive(const PoolConfig& config);
std::uint64_t operation_count(const PoolConfig& config);

/// [(max K)^2 + max K] * |M|^2
std::uint64_t operation_bound(const PoolConfig& config);

}  // namespace vbspool
