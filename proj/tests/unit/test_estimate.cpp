#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "qtraj/estimate.hpp"
#include "qtraj/rng.hpp"

using namespace qtraj;
using cplx = std::complex<double>;

TEST(McMean, ConstantStream) {
  const std::vector<cplx> xs(100, cplx(2.5, -1.0));
  const MCEstimate e = mc_mean(xs);
  EXPECT_EQ(e.mean, cplx(2.5, -1.0));
  EXPECT_EQ(e.std_of_mean, 0.0);
  EXPECT_EQ(e.n_samples, 100);
}

TEST(McMean, TwoPoints) {
  const std::vector<cplx> xs{0.0, 2.0};
  const MCEstimate e = mc_mean(xs);
  Accumulator a;
  for (cplx x : xs) a.add(x);
  EXPECT_DOUBLE_EQ(e.mean.real(), 1.0);
  EXPECT_DOUBLE_EQ(std::sqrt(a.variance()), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(e.std_of_mean, 1.0);
}

TEST(McMean, TooFewSamples) {
  const std::vector<cplx> one{1.0};
  EXPECT_THROW(mc_mean(one), std::domain_error);
}

TEST(McMean, MergeOfHalvesMatchesWhole) {
  RngStream r(3, 0);
  std::vector<cplx> xs;
  for (int i = 0; i < 1001; ++i) xs.emplace_back(r.normal() * 3.0 + 1.0, r.normal());
  Accumulator whole, left, right;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    whole.add(xs[i]);
    (i < 400 ? left : right).add(xs[i]);
  }
  left.merge(right);
  EXPECT_NEAR(std::abs(left.mean() - whole.mean()), 0.0, 1e-12 * std::abs(whole.mean()));
  EXPECT_NEAR(left.variance(), whole.variance(), 1e-12 * whole.variance());
}

TEST(Ratio, EqualNumeratorAndDenominator) {
  RatioAccumulator r;
  RngStream rng(1, 1);
  for (int i = 0; i < 50; ++i) {
    const double x = 1.0 + rng.uniform();
    r.add(x, x);
  }
  const RatioEstimate e = r.ratio();
  EXPECT_FALSE(e.degenerate);
  EXPECT_NEAR(e.value.mean.real(), 1.0, 1e-15);
  EXPECT_NEAR(e.value.std_of_mean, 0.0, 1e-12);
}

TEST(Ratio, DegenerateDenominator) {
  RatioAccumulator r;
  r.add(1.0, 1.0);
  r.add(1.0, -1.0);
  r.add(1.0, 0.5);
  const RatioEstimate e = r.ratio();
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.value.std_of_mean, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(std::isfinite(e.delta_std));
  EXPECT_GT(e.delta_std, 0.0);
}

TEST(Ratio, ZeroDenominator) {
  RatioAccumulator r;
  r.add(1.0, 1.0);
  r.add(1.0, -1.0);
  const RatioEstimate e = r.ratio();
  EXPECT_TRUE(e.degenerate);
  EXPECT_TRUE(std::isnan(e.value.mean.real()));
}

TEST(Ratio, DeltaMethodMatchesBootstrapScale) {
  // Independent numerator and denominator: the first-order variance of
  // N/D is (var N + S^2 var D) / D^2 / n.
  RatioAccumulator r;
  RngStream rng(2, 2);
  const int n = 200000;
  for (int i = 0; i < n; ++i) r.add(2.0 + rng.normal(), 4.0 + 0.5 * rng.normal());
  const RatioEstimate e = r.ratio();
  const double expected = std::sqrt((1.0 + 0.25 * 0.25) / 16.0 / n);
  EXPECT_NEAR(e.value.mean.real(), 0.5, 5.0 * expected);
  EXPECT_NEAR(e.value.std_of_mean, expected, 0.02 * expected);
}

TEST(Ratio, MergeMatchesSequential) {
  RatioAccumulator whole, a, b;
  RngStream rng(7, 0);
  for (int i = 0; i < 300; ++i) {
    const cplx n(rng.normal(), rng.normal()), d(3.0 + rng.normal(), 0.1 * rng.normal());
    whole.add(n, d);
    (i % 3 == 0 ? a : b).add(n, d);
  }
  a.merge(b);
  EXPECT_NEAR(std::abs(a.ratio().value.mean - whole.ratio().value.mean), 0.0, 1e-12);
  EXPECT_NEAR(a.ratio().value.std_of_mean, whole.ratio().value.std_of_mean, 1e-12);
}
