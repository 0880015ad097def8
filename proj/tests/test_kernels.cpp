#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "vbspool/kernels.hpp"

using namespace vbspool::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

std::vector<double> naive_convolve(const std::vector<double>& q, const std::vector<double>& w, std::size_t len) {
  std::vector<double> out(len, 0.0);
  for (std::size_t n = 0; n < len; ++n)
    for (std::size_t j = 0; j < w.size(); ++j)
      if (j <= n && n - j < q.size()) out[n] += w[j] * q[n - j];
  return out;
}

class Backends : public ::testing::TestWithParam<Backend> {
 protected:
  void SetUp() override {
    if (!backend_available(GetParam())) GTEST_SKIP() << to_string(GetParam()) << " unavailable";
  }
};

}  // namespace

TEST_P(Backends, ConvolveMatchesNaive) {
  const auto& k = table(GetParam());
  std::mt19937_64 rng(1);
  for (std::size_t ql = 1; ql < 40; ql += 3)
    for (std::size_t wl = 1; wl < 35; wl += 2)
      for (std::size_t len : {std::size_t{1}, ql, ql + wl - 1, (ql + wl) / 2}) {
        if (len == 0 || len > ql + wl - 1) continue;
        const auto q = random_vector(rng, ql);
        const auto w = random_vector(rng, wl);
        std::vector<double> out(len);
        k.convolve(q, w, out);
        const auto ref = naive_convolve(q, w, len);
        for (std::size_t n = 0; n < len; ++n) EXPECT_NEAR(out[n], ref[n], 1e-13 * (1.0 + ref[n]));
      }
}

TEST_P(Backends, DotReversedMatchesNaive) {
  const auto& k = table(GetParam());
  std::mt19937_64 rng(2);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vector(rng, n);
    const auto y = random_vector(rng, n);
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref += x[i] * y[n - 1 - i];
    EXPECT_NEAR(k.dot_reversed(x, y), ref, 1e-13 * (1.0 + ref));
  }
}

TEST_P(Backends, SumAndScale) {
  const auto& k = table(GetParam());
  std::mt19937_64 rng(3);
  for (std::size_t n = 0; n < 50; ++n) {
    auto x = random_vector(rng, n);
    double ref = 0.0;
    for (double v : x) ref += v;
    EXPECT_NEAR(k.sum(x), ref, 1e-13 * (1.0 + ref));
    auto y = x;
    k.scale(y, 0.37);
    for (std::size_t i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(y[i], x[i] * 0.37);
  }
}

INSTANTIATE_TEST_SUITE_P(All, Backends, ::testing::Values(Backend::Scalar, Backend::Avx2),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Equivalence, Avx2AgreesWithScalar) {
  if (!backend_available(Backend::Avx2)) GTEST_SKIP() << "no AVX2";
  const auto& s = table(Backend::Scalar);
  const auto& v = table(Backend::Avx2);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t ql = 1 + rng() % 400, wl = 1 + rng() % 60;
    const std::size_t len = 1 + rng() % (ql + wl - 1);
    const auto q = random_vector(rng, ql);
    const auto w = random_vector(rng, wl);
    std::vector<double> a(len), b(len);
    s.convolve(q, w, a);
    v.convolve(q, w, b);
    for (std::size_t n = 0; n < len; ++n) EXPECT_NEAR(a[n], b[n], 1e-14 * (1.0 + a[n]));
    const std::size_t n = std::min(ql, wl);
    EXPECT_NEAR(s.dot_reversed(std::span(q).first(n), std::span(w).first(n)),
                v.dot_reversed(std::span(q).first(n), std::span(w).first(n)), 1e-13);
  }
}

TEST(Dispatch, OverrideAndRestore) {
  const Backend saved = active_backend();
  set_active_backend(Backend::Scalar);
  EXPECT_EQ(active_backend(), Backend::Scalar);
  EXPECT_EQ(&active(), &table(Backend::Scalar));
  set_active_backend(saved);
  if (!backend_available(Backend::Avx2)) EXPECT_THROW(set_active_backend(Backend::Avx2), std::invalid_argument);
}

TEST(Counting, ConvolutionTerms) {
  EXPECT_EQ(convolution_terms(3, 2, 4), 6u);  // full product: 3 * 2
  EXPECT_EQ(convolution_terms(3, 2, 2), 3u);  // n=0: 1 term, n=1: 2 terms
  EXPECT_EQ(convolution_terms(1, 5, 5), 5u);
}
