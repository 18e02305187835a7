#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qtraj/estimate.hpp"
#include "qtraj/green.hpp"
#include "qtraj/sampling.hpp"

namespace qtraj {

// Polarizer settings in degrees. Defaults are the angles of maximal CH
// violation.
struct BellAngles {
  double theta = 0.0;
  double theta_prime = 45.0;
  double phi = 22.5;
  double phi_prime = 67.5;
};

enum class BellSampler {
  Contour,    // two-branch Keldysh covariance (includes vacuum fluctuations)
  EqualTime,  // normal-ordered equal-time covariance
};

struct BellConfig {
  double kappa = 1.0;
  std::vector<double> kappa_t;  // evaluation points, in units of kappa*t
  BellAngles angles;
  std::int64_t n_samples = 100000;
  std::uint64_t master_seed = 1;
  BellSampler sampler = BellSampler::Contour;
  unsigned n_workers = 1;

  void validate() const;
};

// Field values after the polarizers, for one sample.
struct PolarizedSample {
  cplx c_plus, c_minus, d_plus, d_minus;
  cplx c_plus_sharp, c_minus_sharp, d_plus_sharp, d_minus_sharp;
};

// Modes (a1, a2, b1, b2) rotated by theta (wing A) and phi (wing B), radians.
// The same real rotation is applied to alpha and alpha#. Throws
// std::invalid_argument unless both vectors have 4 entries.
PolarizedSample polarize(const ComplexVector& alpha, const ComplexVector& alpha_sharp,
                         double theta_rad, double phi_rad);
PolarizedSample polarize(const QuasiTrajectory& sample, double theta_rad, double phi_rad);

// Per-sample integrands of the intensity moments.
cplx intensity_a(const PolarizedSample& s);   // c+ c+# (d+ d+# + d- d-#)
cplx intensity_b(const PolarizedSample& s);   // d+ d+# (c+ c+# + c- c-#)
cplx intensity_ab(const PolarizedSample& s);  // c+ c+# d+ d+#

struct IntensityValues {
  cplx i_a, i_b, i_ab_tp, i_ab_tpp, i_ab_tptp, i_ab_tptpp;
};

// Monte Carlo intensity moments at one time. All six share the same
// quasitrajectories (common random numbers); `ch` keeps the joint
// numerator/denominator statistics of S_CH.
struct IntensityMoments {
  MCEstimate i_a;         // I_+^A(theta')
  MCEstimate i_b;         // I_+^B(phi)
  MCEstimate i_ab_tp;     // I_++(theta,  phi)
  MCEstimate i_ab_tpp;    // I_++(theta,  phi')
  MCEstimate i_ab_tptp;   // I_++(theta', phi)
  MCEstimate i_ab_tptpp;  // I_++(theta', phi')
  RatioAccumulator ch;
};

IntensityMoments intensity_moments_mc(const BellConfig& cfg, double kappa_t,
                                 std::uint32_t substream = 0);

// Exact moments from Wick pairings of the normal-ordered covariance.
IntensityValues intensity_moments_oracle(double kappa_t, const BellAngles& angles);

RatioEstimate s_ch(const IntensityMoments& moments);
double s_ch_oracle(double kappa_t, const BellAngles& angles);

struct BellRow {
  double kappa_t = 0.0;
  RatioEstimate s_ch;
  double s_ch_oracle = 0.0;
  IntensityMoments moments;
  IntensityValues oracle;
};

std::vector<BellRow> bell_sweep(const BellConfig& cfg);

void write_bell_csv(std::ostream& out, const BellConfig& cfg,
                    const std::vector<BellRow>& rows);

}  // namespace qtraj
