#pragma once

#include <cstddef>
#include <vector>

#include "qtraj/green.hpp"

namespace qtraj {

// Ordered product of doubled-field components Phi_{i_1} ... Phi_{i_k}.
using Monomial = std::vector<std::size_t>;

inline constexpr std::size_t kMaxWickLength = 12;

// Exact Gaussian moment E[Phi_{i_1} ... Phi_{i_k}] as the sum over all perfect
// pairings of products of covariance entries. Odd length gives 0; lengths
// above kMaxWickLength throw UnsupportedError.
cplx wick_moment(const ComplexMatrix& covariance, const Monomial& mono);
cplx wick_moment(const DoubledCovariance& c, const Monomial& mono);

// A field expressed as a linear combination of Phi components.
struct LinearField {
  std::vector<std::pair<std::size_t, cplx>> terms;
};

// E[x_1 ... x_k] for linear combinations x_i, expanded into monomials.
cplx wick_moment(const ComplexMatrix& covariance,
                 const std::vector<LinearField>& factors);

}  // namespace qtraj
