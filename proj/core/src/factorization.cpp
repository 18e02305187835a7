#include "qtraj/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qtraj/errors.hpp"

namespace qtraj {

namespace {

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) throw FactorizationError(std::string(what) + ": non-finite entries");
}

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
}

}  // namespace

Factorization factorize_svd(const ComplexMatrix& g, double rank_tol) {
  require_square(g, "factorize_svd");
  require_finite(g, "factorize_svd");
  Eigen::BDCSVD<ComplexMatrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Eigen::Index keep = 0;
  while (keep < s.size() && s(keep) > rank_tol * smax) ++keep;

  Factorization f;
  f.rank_tol = rank_tol;
  const Eigen::VectorXd root = s.head(keep).cwiseSqrt();
  f.U = svd.matrixU().leftCols(keep) * root.asDiagonal();
  f.W = root.asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
  return f;
}

Factorization factorize_svd(const GreenMatrix& g, double rank_tol) {
  return factorize_svd(g.entries, rank_tol);
}

SymmetricFactorization factorize_takagi(const ComplexMatrix& c, double rank_tol) {
  require_square(c, "factorize_takagi");
  require_finite(c, "factorize_takagi");
  const double norm = c.norm();
  if ((c - c.transpose()).norm() > 1e-10 * std::max(1.0, norm))
    throw std::invalid_argument("factorize_takagi: matrix is not symmetric");

  // C = A + iB symmetric. The real symmetric M = [[A, B], [B, -A]] has
  // eigenpairs (+-sigma); for M (x, y) = sigma (x, y) with sigma > 0,
  // u = x + i y satisfies C conj(u) = sigma u.
  const Eigen::Index n = c.rows();
  const Eigen::MatrixXd a = c.real();
  const Eigen::MatrixXd b = c.imag();
  Eigen::MatrixXd m(2 * n, 2 * n);
  m << a, b, b, -a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw FactorizationError("factorize_takagi: eigensolver failed");

  const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
  const double emax = ev.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 2 * n - 1; k >= 0; --k)
    if (ev(k) > rank_tol * emax) keep.push_back(k);

  SymmetricFactorization f;
  f.L.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto v = eig.eigenvectors().col(keep[j]);
    const double root = std::sqrt(ev(keep[j]));
    for (Eigen::Index i = 0; i < n; ++i)
      f.L(i, static_cast<Eigen::Index>(j)) = cplx(v(i), v(n + i)) * root;
  }
  return f;
}

SymmetricFactorization factorize_takagi(const DoubledCovariance& c, double rank_tol) {
  return factorize_takagi(c.entries, rank_tol);
}

double frobenius_residual(const Factorization& f, const ComplexMatrix& g) {
  return (f.U * f.W - g).norm();
}

double frobenius_residual(const SymmetricFactorization& f, const ComplexMatrix& c) {
  return (f.L * f.L.transpose() - c).norm();
}

}  // namespace qtraj
