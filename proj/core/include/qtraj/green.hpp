#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "qtraj/contour.hpp"

namespace qtraj {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Two-point function over (contour node, mode) pairs, flattened as
// index = node * modes + mode.
struct GreenMatrix {
  ComplexMatrix entries;
  std::size_t nodes = 0;
  std::size_t modes = 1;

  std::size_t dimension() const { return nodes * modes; }
  std::size_t index(std::size_t node, std::size_t mode) const {
    return node * modes + mode;
  }
};

// Covariance E[Phi Phi^T] of the doubled field Phi = (alpha_1..alpha_M,
// alpha#_1..alpha#_M). Components are commuting classical variables, so the
// matrix is complex symmetric. Blocks:
//   alpha#-alpha  (normal)     <-> <a_i^dag a_j>
//   alpha-alpha   (anomalous)  <-> <a_i^dag a_j^dag>
//   alpha#-alpha# (anomalous)  <-> <a_i a_j>
struct DoubledCovariance {
  ComplexMatrix entries;
  std::size_t modes = 0;

  std::size_t alpha(std::size_t mode) const { return mode; }
  std::size_t alpha_sharp(std::size_t mode) const { return modes + mode; }
};

// G(l,p) = <0| T_C a(tau_l) a^dag(tau_p) |0> for H_b = omega a^dag a.
// Equal contour points use the <a a^dag> ordering, so the diagonal is 1.
GreenMatrix bath_green_single_mode(const ContourGrid& grid, double omega);

// PDC mode ordering used by all Bell-related covariances.
enum PdcMode : std::size_t { kA1 = 0, kA2 = 1, kB1 = 2, kB2 = 3, kPdcModes = 4 };

// Normal-ordered equal-time moments of exp(-i H t)|vac> for the two-pair
// down-conversion Hamiltonian, as a doubled covariance over the 4 modes.
// Depends on kappa and t only through kappa*t.
DoubledCovariance pdc_doubled_covariance(double kappa, double t);

// Two-branch Keldysh covariance at the final time: fields alpha(+), alpha(-),
// alpha#(+), alpha#(-) for the 4 modes. "Mode" index m in the returned
// DoubledCovariance is branch*4 + pdc_mode (branch 0 forward, 1 backward).
// Annihilators read on the forward branch and creators on the backward branch
// reproduce the normal-ordered moments; the remaining contour-ordered entries
// carry the vacuum <a a^dag> = 1 contributions.
DoubledCovariance pdc_contour_covariance(double kappa, double t);

}  // namespace qtraj
