#include <cmath>

#include <gtest/gtest.h>

#include "qtraj/factorization.hpp"
#include "qtraj/sampling.hpp"
#include "stats.hpp"

using namespace qtraj;
using qtraj::testing::max_cross_moment_z;

TEST(SampleGamma, EmptyVector) {
  RngStream r(1, 0);
  EXPECT_EQ(sample_gamma(0, r).size(), 0);
}

TEST(SampleGamma, ComplexNormalMoments) {
  RngStream r(5, 0);
  const int n = 1000000;
  const ComplexVector g = sample_gamma(n, r);
  EXPECT_NEAR(g.squaredNorm() / n, 1.0, 5e-3);
  EXPECT_NEAR(std::abs(g.array().square().sum() / static_cast<double>(n)), 0.0, 5e-3);
}

TEST(Quasitrajectory, ZeroGammaGivesZeroFields) {
  const Factorization f = factorize_svd(bath_green_single_mode(ContourGrid(1.0, 4), 1.0));
  const QuasiTrajectory q = quasitrajectory_from_gamma(f, ComplexVector::Zero(f.rank()));
  EXPECT_EQ(q.alpha.norm(), 0.0);
  EXPECT_EQ(q.alpha_sharp.norm(), 0.0);
}

TEST(Quasitrajectory, ScalarGreenFunction) {
  const Factorization f = factorize_svd(ComplexMatrix::Ones(1, 1));
  RngStream r(2, 0);
  cplx sum{};
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const QuasiTrajectory q = sample_quasitrajectory(f, r);
    sum += q.alpha_sharp(0) * q.alpha(0);
  }
  EXPECT_NEAR(std::abs(sum / static_cast<double>(n) - 1.0), 0.0, 5e-3);
}

TEST(Quasitrajectory, BathCovarianceAndAnomalousMoments) {
  const GreenMatrix g = bath_green_single_mode(ContourGrid(1.0, 5), 1.0);
  const Factorization f = factorize_svd(g);
  std::vector<QuasiTrajectory> qs;
  const std::int64_t n = 100000;
  for (std::int64_t k = 0; k < n; ++k) {
    RngStream r(17, static_cast<std::uint64_t>(k));
    qs.push_back(sample_quasitrajectory(f, r));
  }
  const auto dim = g.entries.rows();
  EXPECT_LE(max_cross_moment_z(
                n, [&](std::int64_t k) { return std::pair{qs[k].alpha_sharp, qs[k].alpha}; },
                g.entries),
            5.0);
  EXPECT_LE(max_cross_moment_z(
                n, [&](std::int64_t k) { return std::pair{qs[k].alpha, qs[k].alpha}; },
                ComplexMatrix::Zero(dim, dim)),
            5.0);
  EXPECT_LE(max_cross_moment_z(
                n, [&](std::int64_t k) { return std::pair{qs[k].alpha_sharp, qs[k].alpha_sharp}; },
                ComplexMatrix::Zero(dim, dim)),
            5.0);
}

TEST(Doubled, ZeroEtaGivesZeroField) {
  const SymmetricFactorization f = factorize_takagi(ComplexMatrix::Identity(4, 4));
  const QuasiTrajectory q = doubled_from_eta(f, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(q.alpha.norm() + q.alpha_sharp.norm(), 0.0);
}

TEST(Doubled, IdentityVariance) {
  const SymmetricFactorization f = factorize_takagi(ComplexMatrix::Identity(2, 2));
  const std::int64_t n = 100000;
  Accumulator acc;
  for (std::int64_t k = 0; k < n; ++k) {
    RngStream r(4, static_cast<std::uint64_t>(k));
    const QuasiTrajectory q = sample_doubled(f, r);
    acc.add(q.alpha(0) * q.alpha(0));
  }
  const MCEstimate e = acc.estimate();
  EXPECT_LE(std::abs(e.mean - 1.0), 5.0 * e.std_of_mean);
}

TEST(Doubled, PdcCovariance) {
  const DoubledCovariance c = pdc_doubled_covariance(1.0, 0.5);
  const SymmetricFactorization f = factorize_takagi(c);
  const std::int64_t n = 100000;
  auto draw = [&](std::int64_t k) {
    RngStream r(8, static_cast<std::uint64_t>(k));
    const QuasiTrajectory q = sample_doubled(f, r);
    ComplexVector phi(8);
    phi << q.alpha, q.alpha_sharp;
    return std::pair{phi, phi};
  };
  EXPECT_LE(max_cross_moment_z(n, draw, c.entries), 5.0);
}
