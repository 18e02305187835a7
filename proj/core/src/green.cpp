#include "qtraj/green.hpp"

#include <cmath>
#include <stdexcept>

namespace qtraj {

GreenMatrix bath_green_single_mode(const ContourGrid& grid, double omega) {
  const std::size_t n = grid.size();
  GreenMatrix g;
  g.nodes = n;
  g.modes = 1;
  g.entries = ComplexMatrix::Zero(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    const double tl = grid.time(l);
    for (std::size_t p = 0; p <= l; ++p)
      g.entries(l, p) = std::exp(cplx(0.0, -omega * (tl - grid.time(p))));
  }
  return g;
}

namespace {

struct PdcMoments {
  double occupation;  // <a^dag a>, same for all four modes
  double pair;        // <a1 b1> = <a2 b2>
};

PdcMoments pdc_moments(double kappa, double t) {
  if (kappa < 0.0 || t < 0.0) throw std::invalid_argument("pdc: kappa and t must be >= 0");
  const double r = kappa * t;
  const double s = std::sinh(r);
  return {s * s, s * std::cosh(r)};
}

void set_symmetric(ComplexMatrix& m, std::size_t i, std::size_t j, cplx v) {
  m(i, j) = v;
  m(j, i) = v;
}

}  // namespace

DoubledCovariance pdc_doubled_covariance(double kappa, double t) {
  const PdcMoments pm = pdc_moments(kappa, t);
  DoubledCovariance c;
  c.modes = kPdcModes;
  c.entries = ComplexMatrix::Zero(2 * kPdcModes, 2 * kPdcModes);
  for (std::size_t i = 0; i < kPdcModes; ++i)
    set_symmetric(c.entries, c.alpha(i), c.alpha_sharp(i), pm.occupation);
  for (auto [a, b] : {std::pair{kA1, kB1}, std::pair{kA2, kB2}}) {
    set_symmetric(c.entries, c.alpha_sharp(a), c.alpha_sharp(b), pm.pair);
    set_symmetric(c.entries, c.alpha(a), c.alpha(b), pm.pair);
  }
  return c;
}

DoubledCovariance pdc_contour_covariance(double kappa, double t) {
  const PdcMoments pm = pdc_moments(kappa, t);
  DoubledCovariance c;
  c.modes = 2 * kPdcModes;
  c.entries = ComplexMatrix::Zero(4 * kPdcModes, 4 * kPdcModes);

  auto pair_moment = [&](std::size_t k, std::size_t l) -> double {
    if ((k == kA1 && l == kB1) || (k == kB1 && l == kA1)) return pm.pair;
    if ((k == kA2 && l == kB2) || (k == kB2 && l == kA2)) return pm.pair;
    return 0.0;
  };

  for (std::size_t sk = 0; sk < 2; ++sk) {
    for (std::size_t sl = 0; sl < 2; ++sl) {
      for (std::size_t k = 0; k < kPdcModes; ++k) {
        for (std::size_t l = 0; l < kPdcModes; ++l) {
          const std::size_t mk = sk * kPdcModes + k;
          const std::size_t ml = sl * kPdcModes + l;
          // alpha#_k(sk) alpha_l(sl): the creator sits to the left unless the
          // annihilator is contour-later or at the same branch point.
          double normal = (k == l) ? pm.occupation : 0.0;
          const bool creator_later = (sk == 0 && sl == 1);
          if (k == l && !creator_later) normal += 1.0;
          set_symmetric(c.entries, c.alpha_sharp(mk), c.alpha(ml), normal);
          c.entries(c.alpha_sharp(mk), c.alpha_sharp(ml)) = pair_moment(k, l);
          c.entries(c.alpha(mk), c.alpha(ml)) = pair_moment(k, l);
        }
      }
    }
  }
  return c;
}

}  // namespace qtraj
