#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "qtraj/green.hpp"

namespace qtraj {

inline constexpr double kDefaultRankTol = 1e-12;

// G ~= U * W with U n x m and W m x n. W plays the role of V^* in G = U V^*.
struct Factorization {
  ComplexMatrix U;
  ComplexMatrix W;
  double rank_tol = kDefaultRankTol;

  std::size_t rank() const { return static_cast<std::size_t>(U.cols()); }
  std::size_t dimension() const { return static_cast<std::size_t>(U.rows()); }
};

// C ~= L * L^T for a complex symmetric C.
struct SymmetricFactorization {
  ComplexMatrix L;

  std::size_t rank() const { return static_cast<std::size_t>(L.cols()); }
  std::size_t dimension() const { return static_cast<std::size_t>(L.rows()); }
};

// U = U_s sqrt(Sigma), W = sqrt(Sigma) V_s^dag from the SVD G = U_s Sigma V_s^dag.
// Singular values below rank_tol * sigma_max are dropped.
Factorization factorize_svd(const GreenMatrix& g, double rank_tol = kDefaultRankTol);
Factorization factorize_svd(const ComplexMatrix& g, double rank_tol = kDefaultRankTol);

// Takagi (Autonne) factorization C = U_t Sigma U_t^T, returned as
// L = U_t sqrt(Sigma). Throws std::invalid_argument if C is not symmetric to
// within 1e-10 * max(1, ||C||_F).
SymmetricFactorization factorize_takagi(const DoubledCovariance& c,
                                        double rank_tol = kDefaultRankTol);
SymmetricFactorization factorize_takagi(const ComplexMatrix& c,
                                        double rank_tol = kDefaultRankTol);

double frobenius_residual(const Factorization& f, const ComplexMatrix& g);
double frobenius_residual(const SymmetricFactorization& f, const ComplexMatrix& c);

// Structured SVD of the single-mode bath Green matrix on a contour grid.
//
// G = D L D^dag where D = diag(exp(-i omega t_l)) and L is the contour-order
// lower-triangular ones matrix. L has the closed-form SVD
//   sigma_k = 1 / (2 sin(theta_k / 2)),  theta_k = (2k+1) pi / (2n+1),
//   u_k(j) = a sin((j+1) theta_k),       v_k(j) = a cos((j+1/2) theta_k),
// with a = 2 / sqrt(2n+1), so U = D U_L sqrt(Sigma) and
// W = sqrt(Sigma) V_L^T D^dag form an exact SVD-based factorization.
// U gamma^* and W^T gamma are applied with FFTs of length 2n+1, O(n log n).
class BathFactorization {
 public:
  BathFactorization(const ContourGrid& grid, double omega);
  ~BathFactorization();
  BathFactorization(BathFactorization&&) noexcept;
  BathFactorization& operator=(BathFactorization&&) noexcept;
  BathFactorization(const BathFactorization&) = delete;
  BathFactorization& operator=(const BathFactorization&) = delete;

  std::size_t dimension() const { return n_; }
  std::size_t rank() const { return n_; }
  double omega() const { return omega_; }
  const ContourGrid& grid() const { return grid_; }
  std::span<const double> singular_values() const { return sigma_; }

  // Per-thread scratch space for apply(); create one per worker.
  class Workspace {
   public:
    explicit Workspace(std::size_t fft_length);

   private:
    friend class BathFactorization;
    std::vector<cplx> in, out;
  };
  Workspace make_workspace() const { return Workspace(fft_length_); }

  // alpha = W^T gamma, alpha_sharp = U conj(gamma). Thread-safe given
  // distinct workspaces.
  void apply(std::span<const cplx> gamma, std::span<cplx> alpha,
             std::span<cplx> alpha_sharp, Workspace& ws) const;

  // Dense U and W; intended for verification on small grids.
  Factorization dense() const;

 private:
  struct Plans;

  ContourGrid grid_;
  double omega_;
  std::size_t n_;
  std::size_t fft_length_;
  std::vector<double> sigma_;
  std::vector<double> scale_;  // a * sqrt(sigma_k)
  std::vector<cplx> phase_;    // exp(-i omega t_l)
  std::unique_ptr<Plans> plans_;
};

}  // namespace qtraj
