#include "qtraj/sampling.hpp"

#include <cmath>
#include <numbers>

namespace qtraj {

ComplexVector sample_gamma(std::size_t m, RngStream& rng) {
  ComplexVector g(static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double x = rng.normal();
    const double y = rng.normal();
    g(k) = cplx(x, y) * std::numbers::sqrt2 * 0.5;
  }
  return g;
}

QuasiTrajectory quasitrajectory_from_gamma(const Factorization& f, const ComplexVector& gamma) {
  return {f.W.transpose() * gamma, f.U * gamma.conjugate()};
}

QuasiTrajectory sample_quasitrajectory(const Factorization& f, RngStream& rng) {
  return quasitrajectory_from_gamma(f, sample_gamma(f.rank(), rng));
}

QuasiTrajectory doubled_from_eta(const SymmetricFactorization& f, const Eigen::VectorXd& eta) {
  const ComplexVector phi = f.L * eta.cast<cplx>();
  const Eigen::Index half = phi.size() / 2;
  return {phi.head(half), phi.tail(phi.size() - half)};
}

QuasiTrajectory sample_doubled(const SymmetricFactorization& f, RngStream& rng) {
  Eigen::VectorXd eta(static_cast<Eigen::Index>(f.rank()));
  for (Eigen::Index k = 0; k < eta.size(); ++k) eta(k) = rng.normal();
  return doubled_from_eta(f, eta);
}

}  // namespace qtraj
