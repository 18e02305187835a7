#pragma once

#include <cstddef>

#include "qtraj/factorization.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

// Sampled fields alpha and alpha#. The two are independent complex vectors,
// not complex conjugates of each other.
struct QuasiTrajectory {
  ComplexVector alpha;
  ComplexVector alpha_sharp;
};

// gamma_k = (x + i y) / sqrt(2), x, y independent standard normals, so that
// E[conj(gamma) gamma^T] = I and E[gamma gamma^T] = 0.
ComplexVector sample_gamma(std::size_t m, RngStream& rng);

// alpha = W^T gamma, alpha# = U conj(gamma); E[alpha# alpha^T] = U W.
QuasiTrajectory sample_quasitrajectory(const Factorization& f, RngStream& rng);
QuasiTrajectory quasitrajectory_from_gamma(const Factorization& f,
                                           const ComplexVector& gamma);

// Phi = L eta with eta real standard normal; E[Phi Phi^T] = L L^T.
// alpha = first half of Phi, alpha# = second half.
QuasiTrajectory sample_doubled(const SymmetricFactorization& f, RngStream& rng);
QuasiTrajectory doubled_from_eta(const SymmetricFactorization& f,
                                 const Eigen::VectorXd& eta);

}  // namespace qtraj
