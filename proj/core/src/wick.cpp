#include "qtraj/wick.hpp"

#include <stdexcept>
#include <string>

#include "qtraj/errors.hpp"

namespace qtraj {

namespace {

// Sum over perfect pairings of the first `count` entries of idx, where pairs
// contribute k(idx[a], idx[b]).
template <class Cov>
cplx pairings(const Cov& k, std::size_t* idx, std::size_t count) {
  if (count == 0) return {1.0, 0.0};
  cplx total{};
  const std::size_t first = idx[0];
  for (std::size_t j = 1; j < count; ++j) {
    const cplx c = k(first, idx[j]);
    if (c == cplx{}) continue;
    std::swap(idx[j], idx[count - 1]);
    total += c * pairings(k, idx + 1, count - 2);
    std::swap(idx[j], idx[count - 1]);
  }
  return total;
}

void check_length(std::size_t len) {
  if (len > kMaxWickLength)
    throw UnsupportedError("wick moment of length " + std::to_string(len) +
                           " exceeds the supported maximum " + std::to_string(kMaxWickLength));
}

}  // namespace

cplx wick_moment(const ComplexMatrix& covariance, const Monomial& mono) {
  check_length(mono.size());
  const auto dim = static_cast<std::size_t>(covariance.rows());
  for (std::size_t i : mono)
    if (i >= dim) throw std::out_of_range("wick moment: component index out of range");
  if (mono.size() % 2 != 0) return {};
  Monomial idx = mono;
  auto k = [&](std::size_t a, std::size_t b) {
    return covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  return pairings(k, idx.data(), idx.size());
}

cplx wick_moment(const DoubledCovariance& c, const Monomial& mono) {
  return wick_moment(c.entries, mono);
}

cplx wick_moment(const ComplexMatrix& covariance, const std::vector<LinearField>& factors) {
  check_length(factors.size());
  const std::size_t n = factors.size();
  const auto dim = static_cast<std::size_t>(covariance.rows());
  for (const auto& f : factors)
    for (const auto& [i, c] : f.terms)
      if (i >= dim) throw std::out_of_range("wick moment: component index out of range");
  if (n % 2 != 0) return {};

  // Pair covariances of the linear combinations.
  ComplexMatrix k = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      cplx s{};
      for (const auto& [i, ci] : factors[a].terms)
        for (const auto& [j, cj] : factors[b].terms)
          s += ci * cj * covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s;
      k(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = s;
    }
  Monomial idx(n);
  for (std::size_t a = 0; a < n; ++a) idx[a] = a;
  auto kk = [&](std::size_t a, std::size_t b) {
    return k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  return pairings(kk, idx.data(), n);
}

}  // namespace qtraj
