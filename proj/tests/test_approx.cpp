#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vbspool/approx.hpp"
#include "vbspool/recursive.hpp"

using namespace vbspool;

namespace {

PoolConfig homogeneous(int m, int k, double a, int n, Discipline d = Discipline::PerSession) {
  return {{{m, k, a, 1.0, d}}, n};
}

// Solves computational_term(alpha) = delta by bisection; the term falls
// monotonically in alpha.
double alpha_by_bisection(long m, double sigma_sq, double delta) {
  double lo = 1e-9, hi = 50.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double term = 1.0 / (std::sqrt(2.0 * std::numbers::pi * m * sigma_sq) * (std::exp(mid * mid / 2) - 1.0));
    (term > delta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(PoolMoments, WorkedExample) {
  const auto cfg = homogeneous(40, 30, 20.0, 900);
  const auto pm = pool_moments(cfg, {{20.0, 20.0, 0.0}}, 900);
  EXPECT_DOUBLE_EQ(pm.pooled_mean, 20.0);
  EXPECT_DOUBLE_EQ(pm.pooled_variance, 20.0);
  EXPECT_NEAR(pm.normalized_compute, 100.0 / (std::sqrt(40.0) * std::sqrt(20.0)), 1e-14);
  EXPECT_NEAR(pm.normalized_compute, 3.536, 1e-3);
  EXPECT_EQ(pool_moments(cfg, {{20.0, 20.0, 0.0}}, 800).normalized_compute, 0.0);
}

TEST(PoolMoments, EqualClassesAverage) {
  const PoolConfig cfg{{{5, 10, 3.0, 1.0, Discipline::PerSession}, {5, 10, 4.0, 1.0, Discipline::PerSession}}, 60};
  const auto pm = pool_moments(cfg, {{3.0, 3.0, 0.0}, {5.0, 4.0, 0.0}}, 60);
  EXPECT_DOUBLE_EQ(pm.class_fractions[0], 0.5);
  EXPECT_DOUBLE_EQ(pm.class_fractions[1], 0.5);
  EXPECT_DOUBLE_EQ(pm.pooled_mean, 4.0);
  EXPECT_DOUBLE_EQ(pm.pooled_variance, 7.0);
}

TEST(PoolMoments, DegenerateVariance) {
  try {
    pool_moments(homogeneous(4, 3, 1.0, 10), {{1.0, 0.0, 0.0}}, 10);
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "degenerate pool variance");
  }
}

TEST(BlockingApprox, PreconditionAndLimits) {
  const auto cfg = homogeneous(40, 30, 20.0, 700);
  const auto mom = class_moments(cfg, MomentSource::ClosedForm);
  try {
    blocking_approx(cfg, pool_moments(cfg, mom, 700), mom);
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "approximation valid only for N > |M|μ");
  }
  const auto far = blocking_approx(cfg, pool_moments(cfg, mom, 5000), mom);
  EXPECT_LT(far.computational, 1e-300);
  EXPECT_DOUBLE_EQ(far.per_class_overall[0], mom[0].isolated_radio_blocking);
  EXPECT_EQ(far.method, Method::Approximate);
}

TEST(BlockingApprox, InfiniteRadioSurrogate) {
  const auto cfg = homogeneous(40, 400, 20.0, 880);
  const auto mom = class_moments(cfg);
  const auto r = blocking_approx(cfg, pool_moments(cfg, mom, 880), mom);
  EXPECT_LT(mom[0].isolated_radio_blocking, 1e-100);
  EXPECT_NEAR(r.per_class_overall[0], r.computational, 1e-100);
}

TEST(BlockingApprox, ComputationalTermIsClassInvariant) {
  const PoolConfig cfg{{{20, 30, 20.0, 1.0, Discipline::PerSession}, {20, 28, 20.0, 1.0, Discipline::PerSession}}, 900};
  const auto mom = class_moments(cfg);
  const auto r = blocking_approx(cfg, pool_moments(cfg, mom, 900), mom);
  EXPECT_EQ(r.per_class_overall[0] - r.per_class_radio[0], r.per_class_overall[1] - r.per_class_radio[1]);
  EXPECT_NE(r.per_class_overall[0], r.per_class_overall[1]);
}

TEST(BlockingApprox, ErrorShrinksWithPoolSize) {
  double prev = 1e300;
  for (int m : {10, 20, 40, 80}) {
    auto cfg = homogeneous(m, 30, 20.0, 1);
    const auto mom = class_moments(cfg);
    double worst = 0.0;
    for (long n = 1; n <= 30L * m; ++n) {
      cfg.compute_servers = static_cast<int>(n);
      const auto pm = pool_moments(cfg, mom, n);
      if (pm.normalized_compute < 1.0 || pm.normalized_compute > 4.0) continue;
      const double approx = blocking_approx(cfg, pm, mom).per_class_overall[0];
      const double exact = blocking_recursive(cfg).per_class_overall[0];
      worst = std::max(worst, std::abs(approx - exact) / exact);
    }
    EXPECT_LE(worst, prev) << m;
    prev = worst;
  }
}

TEST(Utilization, Limit) {
  const auto cfg = homogeneous(40, 30, 20.0, 1200);
  const auto pm = pool_moments(cfg, {{20.0, 20.0, 0.0}}, 1200);
  const auto u = utilization_limit(cfg, pm);
  EXPECT_NEAR(u.value, 800.0 / 1200.0, 1e-15);
  EXPECT_TRUE(u.precondition_holds);
  const auto doubled = pool_moments(cfg, {{20.0, 20.0, 0.0}}, 2400);
  EXPECT_NEAR(utilization_limit(cfg, doubled).value, u.value / 2, 1e-15);
  EXPECT_FALSE(utilization_limit(cfg, pool_moments(cfg, {{20.0, 20.0, 0.0}}, 900)).precondition_holds);
  const auto exact = pool_moments(cfg, class_moments(cfg), 1200);
  EXPECT_LT(utilization_limit(cfg, exact).value, 1.0);
}

TEST(KneeAlpha, InversionIdentity) {
  for (long m : {1L, 10L, 40L, 1000L, 1000000L})
    for (double s2 : {0.5, 2.0, 20.0})
      for (double d : {1e-6, 1e-4, 1e-2}) {
        const double a = knee_alpha(m, s2, d);
        EXPECT_LE(oracle::rel_diff(computational_term(m, s2, a), d), 1e-12);
        EXPECT_LE(oracle::rel_diff(a, alpha_by_bisection(m, s2, d)), 1e-9);
      }
}

TEST(KneeAlpha, WorkedValueAndMonotone) {
  const double expect = std::sqrt(2.0 * std::log(1.0 / std::sqrt(2 * std::numbers::pi * 40 * 20 * 1e-8) + 1.0));
  EXPECT_NEAR(knee_alpha(40, 20.0, 1e-4), expect, 1e-14);
  EXPECT_GT(knee_alpha(40, 20.0, 1e-4), knee_alpha(41, 20.0, 1e-4));
  EXPECT_GT(knee_alpha(40, 20.0, 1e-4), knee_alpha(40, 21.0, 1e-4));
  EXPECT_GT(knee_alpha(40, 20.0, 1e-4), knee_alpha(40, 20.0, 2e-4));
  EXPECT_LT(knee_alpha(1000000000L, 1e6, 1.0), 1e-3);
  EXPECT_THROW(knee_alpha(0, 1.0, 1e-4), std::invalid_argument);
}

TEST(KneeApprox, HomogeneousBracketCollapses) {
  const auto cfg = homogeneous(40, 30, 20.0, 1200);
  const auto pm = pool_moments(cfg, class_moments(cfg), 1200);
  const auto k = knee_servers_approx(cfg, pm, 1e-4);
  EXPECT_NEAR(k.bracket_low, k.bracket_high, 1e-15);
  EXPECT_NEAR(k.gain_continuous, k.bracket_low, 1e-14);
  EXPECT_TRUE(k.within_bracket);
  EXPECT_GE(k.servers, static_cast<long>(std::ceil(40 * pm.pooled_mean)));
  EXPECT_LT(static_cast<double>(k.servers) / 1200.0, 0.8);
}

TEST(KneeApprox, HeterogeneousInsideBracket) {
  const PoolConfig cfg{{{20, 30, 20.0, 1.0, Discipline::PerSession}, {10, 12, 5.0, 1.0, Discipline::PerSession}}, 700};
  const auto pm = pool_moments(cfg, class_moments(cfg), 700);
  const auto k = knee_servers_approx(cfg, pm, 1e-4);
  EXPECT_TRUE(k.within_bracket);
  EXPECT_LT(k.bracket_low, k.bracket_high);
}

TEST(KneeApprox, SmallPoolGainHalvesWhenQuadrupled) {
  const auto small = homogeneous(10, 30, 20.0, 300);
  const auto big = homogeneous(40, 30, 20.0, 1200);
  const std::vector<ClassMoments> mom{{20.0, 20.0, 0.0}};
  const auto ks = knee_servers_approx(small, pool_moments(small, mom, 300), 1e-6);
  const auto kb = knee_servers_approx(big, pool_moments(big, mom, 1200), 1e-6);
  EXPECT_NEAR(kb.gain_continuous / ks.gain_continuous, 0.5, 0.05);
}

TEST(KneeExact, Floors) {
  const auto cfg = homogeneous(6, 4, 1.5, 24);
  EXPECT_EQ(knee_servers_exact(cfg, 1.0), 1);
  const long n = knee_servers_exact(cfg, 1e-4);
  auto probe = cfg;
  probe.compute_servers = static_cast<int>(n);
  const double floor = erlang_b(1.5, 4);
  EXPECT_LE(blocking_recursive(probe).per_class_overall[0], floor + 1e-4);
  probe.compute_servers = static_cast<int>(n - 1);
  EXPECT_GT(blocking_recursive(probe).per_class_overall[0], floor + 1e-4);
}

TEST(KneeExact, NearApproximateKnee) {
  const auto cfg = homogeneous(40, 30, 20.0, 1200);
  const long exact = knee_servers_exact(cfg, 1e-4);
  const auto approx = knee_servers_approx(cfg, pool_moments(cfg, class_moments(cfg), 1200), 1e-4);
  EXPECT_LE(std::abs(exact - approx.servers), 10);
  EXPECT_GT(1.0 - exact / 1200.0, 0.2);
}

TEST(Regime, Classification) {
  // indicator = sqrt(2 pi |M| sigma^2 delta^2)
  const double s2 = 1.0 / (2.0 * std::numbers::pi);
  EXPECT_EQ(scaling_regime(1, s2, 1.0).regime, Regime::Transitional);
  EXPECT_NEAR(scaling_regime(1, s2, 1.0).indicator, 1.0, 1e-15);
  EXPECT_EQ(scaling_regime(100, 20.0, 1e-6).regime, Regime::SmallPool);
  EXPECT_EQ(scaling_regime(1000000, 20.0, 1e-2).regime, Regime::LargePool);
}

TEST(Regime, Exponents) {
  const auto small = scaling_regime(100, 20.0, 1e-6);
  EXPECT_GE(small.exponent, -0.6);
  EXPECT_LE(small.exponent, -0.45);
  const auto large = scaling_regime(1000000, 20.0, 1e-2);
  EXPECT_GE(large.exponent, -0.85);
  EXPECT_LE(large.exponent, -0.65);
}

TEST(Regime, ExponentMatchesKneeGains) {
  for (long m : {100L, 10000L, 1000000L}) {
    const auto a = homogeneous(static_cast<int>(m), 30, 20.0, static_cast<int>(30 * m));
    const auto b = homogeneous(static_cast<int>(2 * m), 30, 20.0, static_cast<int>(60 * m));
    const std::vector<ClassMoments> mom{{20.0, 20.0, 0.0}};
    const double ga = knee_servers_approx(a, pool_moments(a, mom, 30 * m), 1e-4).gain_continuous;
    const double gb = knee_servers_approx(b, pool_moments(b, mom, 60 * m), 1e-4).gain_continuous;
    EXPECT_NEAR(std::log2(gb / ga), scaling_regime(m, 20.0, 1e-4).exponent, 1e-12);
  }
}

TEST(Gain, Report) {
  const auto cfg = homogeneous(50, 30, 20.0, 1500);
  const auto g = gain_report(cfg, class_moments(cfg), 1e-4);
  EXPECT_TRUE(g.utilization_precondition);
  EXPECT_LT(g.utilization_limit, 1.0);
  EXPECT_GT(g.knee_alpha, 0.0);
  EXPECT_GE(g.knee_servers, static_cast<long>(std::ceil(g.utilization_limit * 1500)));
  EXPECT_NEAR(g.residual_gain, 1.0 - g.utilization_limit, 1e-12);
}
