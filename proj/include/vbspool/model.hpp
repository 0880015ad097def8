#pragma once

// Pool configuration, validation and the per-VBS building blocks that every
// engine consumes.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbspool {

/// Departure-rate law of a VBS holding i sessions.
enum class Discipline {
  PerSession,      // f(i) = i * mu  (real-time, Erlang-loss-like)
  SharedCapacity,  // f(i) = mu      (delay-tolerant, processor-sharing-like)
};

const char* to_string(Discipline d);

struct ClassSpec {
  int count = 0;          // VBSs in the class
  int radio_servers = 0;  // r-servers per VBS
  double arrival_rate = 0.0;
  double service_rate = 0.0;
  Discipline discipline = Discipline::PerSession;

  double load() const { return arrival_rate / service_rate; }
};

struct PoolConfig {
  std::vector<ClassSpec> classes;
  int compute_servers = 0;

  std::size_t num_classes() const { return classes.size(); }
  /// |M|, the number of VBSs in the pool.
  long pool_size() const;
  /// M^T K, the total number of r-servers.
  long total_radio_servers() const;
  int max_radio_servers() const;
  int min_radio_servers() const;
};

/// Thrown for configurations that violate a structural invariant. The
/// message names the offending class (1-based) where one applies.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Returns the config unchanged when every invariant holds; throws
/// ConfigError naming the first violation otherwise.
PoolConfig validate_config(const PoolConfig& raw);

/// f_v(n) for 1 <= n <= K_v. Throws std::out_of_range outside that range.
double service_rate(const ClassSpec& spec, int n);

/// Single-VBS product-form weights w[n] = lambda^n / prod_{i<=n} f(i),
/// n = 0..K, stored normalized to unit sum. The true weights are
/// scaled[n] * exp(log_scale), so true w[0] == 1 means
/// scaled[0] == exp(-log_scale).
struct SingleVbsWeights {
  std::vector<double> scaled;
  std::vector<double> log_weights;  // log of the true weights
  double log_scale = 0.0;

  std::size_t size() const { return scaled.size(); }
  double log_weight(std::size_t n) const { return log_weights[n]; }
};

SingleVbsWeights single_vbs_weights(const ClassSpec& spec);

/// Number of admissible states, counted by truncated convolution of the
/// per-VBS occupancy ranges. Saturates at UINT64_MAX.
std::uint64_t state_space_size(const PoolConfig& config);

/// Class-major flat index range of class v within a state vector.
struct ClassRange {
  std::size_t begin;
  std::size_t end;
};
std::vector<ClassRange> class_ranges(const PoolConfig& config);

}  // namespace vbspool
