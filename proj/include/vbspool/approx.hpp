#pragma once

// Large-pool closed forms: Gaussian blocking approximation, utilization
// limit, residual pooling gain, knee point and scaling-regime diagnostics.

#include <vector>

#include "vbspool/exact.hpp"
#include "vbspool/model.hpp"
#include "vbspool/scenarios.hpp"

namespace vbspool {

/// Which single-VBS statistics feed the pool moments.
enum class MomentSource { Exact, ClosedForm };
const char* to_string(MomentSource s);

/// Per-class moments from the scenario formulas. ClosedForm throws
/// std::domain_error for a delay-tolerant class outside the geometric regime.
std::vector<ClassMoments> class_moments(const PoolConfig& config, MomentSource source = MomentSource::Exact);

struct PoolMoments {
  std::vector<double> class_fractions;  // beta_w = M_w / |M|
  double pooled_mean = 0.0;             // mu = sum beta_w mu_w
  double pooled_variance = 0.0;         // sigma^2 = sum sigma_w^2
  double normalized_compute = 0.0;      // alpha
  long pool_size = 0;
  long compute_servers = 0;
};

/// Throws std::domain_error("degenerate pool variance") when sigma = 0.
PoolMoments pool_moments(const PoolConfig& config, const std::vector<ClassMoments>& moments, long n);

/// 1 / (sqrt(2 pi |M| sigma^2) (e^{alpha^2/2} - 1)), shared by every class.
double computational_term(long pool_size, double sigma_sq, double alpha);

/// Throws std::domain_error unless alpha > 0.
BlockingReport blocking_approx(const PoolConfig& config, const PoolMoments& pm, const std::vector<ClassMoments>& moments);

struct UtilizationLimit {
  double value = 0.0;              // |M| mu / N
  bool precondition_holds = false;  // N >= M^T K
};

UtilizationLimit utilization_limit(const PoolConfig& config, const PoolMoments& pm);

/// N / (M^T K) - |M| mu / (M^T K)
double residual_gain(const PoolConfig& config, const PoolMoments& pm, long n);

double knee_alpha(long pool_size, double sigma_sq, double delta);

struct KneeApprox {
  double alpha = 0.0;       // alpha*
  long servers = 0;         // N* = ceil(|M| mu + alpha* sqrt(|M|) sigma)
  double gain = 0.0;        // (N* - |M| mu) / (M^T K)
  double gain_continuous = 0.0;  // alpha* sqrt(|M|) sigma / (M^T K)
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  bool within_bracket = false;  // gain_continuous inside [low, high]
};

KneeApprox knee_servers_approx(const PoolConfig& config, const PoolMoments& pm, double delta);

/// Smallest N in [1, M^T K] with P_v^b <= isolated P_v^br + delta for every
/// class, by binary search on the recursive engine.
long knee_servers_exact(const PoolConfig& config, double delta);

enum class Regime { SmallPool, LargePool, Transitional };
const char* to_string(Regime r);

inline constexpr double kSmallPoolThreshold = 0.1;
inline constexpr double kLargePoolThreshold = 10.0;

struct RegimeReport {
  Regime regime = Regime::Transitional;
  double indicator = 0.0;  // sqrt(2 pi |M| sigma^2 delta^2)
  double exponent = 0.0;   // d ln g_r* / d ln |M| between |M| and 2|M|
};

RegimeReport scaling_regime(long pool_size, double sigma_sq, double delta);

struct GainReport {
  double utilization_limit = 0.0;
  bool utilization_precondition = false;
  double residual_gain = 0.0;  // at the configured N
  double knee_alpha = 0.0;
  long knee_servers = 0;
  double knee_gain = 0.0;
  double knee_gain_low = 0.0;
  double knee_gain_high = 0.0;
  double delta = 0.0;
  RegimeReport regime;
};

/// Closed-form gain figures for the pool; the utilization limit is taken
/// at N = M^T K, the regime where it is defined.
GainReport gain_report(const PoolConfig& config, const std::vector<ClassMoments>& moments, double delta);

}  // namespace vbspool
