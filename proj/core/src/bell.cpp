#include "qtraj/bell.hpp"

#include <cmath>
#include <limits>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "qtraj/errors.hpp"
#include "qtraj/factorization.hpp"
#include "qtraj/parallel.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/wick.hpp"

namespace qtraj {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

struct AnglesRad {
  double t, tp, p, pp;
};

AnglesRad to_radians(const BellAngles& a) {
  return {radians(a.theta), radians(a.theta_prime), radians(a.phi), radians(a.phi_prime)};
}

// Creator (alpha) and annihilator (alpha#) values of the four PDC modes for
// one sample. Contour samples read creators on the backward branch and
// annihilators on the forward branch.
void mode_fields(const QuasiTrajectory& q, BellSampler sampler, ComplexVector& alpha,
                 ComplexVector& alpha_sharp) {
  if (sampler == BellSampler::Contour) {
    alpha = q.alpha.segment(kPdcModes, kPdcModes);
    alpha_sharp = q.alpha_sharp.head(kPdcModes);
  } else {
    alpha = q.alpha;
    alpha_sharp = q.alpha_sharp;
  }
}

struct BlockMoments {
  Accumulator i_a, i_b, tp, tpp, tptp, tptpp;
  RatioAccumulator ch;

  void merge(const BlockMoments& o) {
    i_a.merge(o.i_a);
    i_b.merge(o.i_b);
    tp.merge(o.tp);
    tpp.merge(o.tpp);
    tptp.merge(o.tptp);
    tptpp.merge(o.tptpp);
    ch.merge(o.ch);
  }
};

}  // namespace

void BellConfig::validate() const {
  if (!std::isfinite(kappa) || kappa <= 0.0)
    throw std::invalid_argument("bell: kappa must be positive and finite");
  for (double v : {angles.theta, angles.theta_prime, angles.phi, angles.phi_prime})
    if (!std::isfinite(v)) throw std::invalid_argument("bell: angles must be finite");
  if (n_samples < 2) throw std::invalid_argument("bell: n_samples must be >= 2");
  if (n_workers == 0) throw std::invalid_argument("bell: n_workers must be >= 1");
  for (double kt : kappa_t)
    if (!std::isfinite(kt) || kt < 0.0)
      throw std::invalid_argument("bell: kappa_t values must be finite and >= 0");
}

PolarizedSample polarize(const ComplexVector& alpha, const ComplexVector& alpha_sharp,
                         double theta_rad, double phi_rad) {
  if (alpha.size() != kPdcModes || alpha_sharp.size() != kPdcModes)
    throw std::invalid_argument("polarize: expected 4 modes (a1, a2, b1, b2)");
  const double ct = std::cos(theta_rad), st = std::sin(theta_rad);
  const double cp = std::cos(phi_rad), sp = std::sin(phi_rad);
  PolarizedSample s;
  s.c_plus = alpha(kA1) * ct + alpha(kA2) * st;
  s.c_minus = -alpha(kA1) * st + alpha(kA2) * ct;
  s.d_plus = alpha(kB1) * cp + alpha(kB2) * sp;
  s.d_minus = -alpha(kB1) * sp + alpha(kB2) * cp;
  s.c_plus_sharp = alpha_sharp(kA1) * ct + alpha_sharp(kA2) * st;
  s.c_minus_sharp = -alpha_sharp(kA1) * st + alpha_sharp(kA2) * ct;
  s.d_plus_sharp = alpha_sharp(kB1) * cp + alpha_sharp(kB2) * sp;
  s.d_minus_sharp = -alpha_sharp(kB1) * sp + alpha_sharp(kB2) * cp;
  return s;
}

PolarizedSample polarize(const QuasiTrajectory& sample, double theta_rad, double phi_rad) {
  return polarize(sample.alpha, sample.alpha_sharp, theta_rad, phi_rad);
}

cplx intensity_a(const PolarizedSample& s) {
  return s.c_plus * s.c_plus_sharp * (s.d_plus * s.d_plus_sharp + s.d_minus * s.d_minus_sharp);
}

cplx intensity_b(const PolarizedSample& s) {
  return s.d_plus * s.d_plus_sharp * (s.c_plus * s.c_plus_sharp + s.c_minus * s.c_minus_sharp);
}

cplx intensity_ab(const PolarizedSample& s) {
  return s.c_plus * s.c_plus_sharp * s.d_plus * s.d_plus_sharp;
}

IntensityMoments intensity_moments_mc(const BellConfig& cfg, double kappa_t,
                                      std::uint32_t substream) {
  cfg.validate();
  const SymmetricFactorization f =
      cfg.sampler == BellSampler::Contour
          ? factorize_takagi(pdc_contour_covariance(1.0, kappa_t))
          : factorize_takagi(pdc_doubled_covariance(1.0, kappa_t));
  const AnglesRad a = to_radians(cfg.angles);

  auto blocks = run_blocks<BlockMoments>(
      static_cast<std::size_t>(cfg.n_samples), cfg.n_workers,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        BlockMoments m;
        ComplexVector alpha, alpha_sharp;
        for (std::size_t i = begin; i < end; ++i) {
          RngStream rng(cfg.master_seed, i, substream);
          mode_fields(sample_doubled(f, rng), cfg.sampler, alpha, alpha_sharp);
          const PolarizedSample s_tp = polarize(alpha, alpha_sharp, a.t, a.p);
          const PolarizedSample s_tpp = polarize(alpha, alpha_sharp, a.t, a.pp);
          const PolarizedSample s_tptp = polarize(alpha, alpha_sharp, a.tp, a.p);
          const PolarizedSample s_tptpp = polarize(alpha, alpha_sharp, a.tp, a.pp);
          const cplx ia = intensity_a(s_tptp);
          const cplx ib = intensity_b(s_tptp);
          const cplx tp = intensity_ab(s_tp);
          const cplx tpp = intensity_ab(s_tpp);
          const cplx tptp = intensity_ab(s_tptp);
          const cplx tptpp = intensity_ab(s_tptpp);
          m.i_a.add(ia);
          m.i_b.add(ib);
          m.tp.add(tp);
          m.tpp.add(tpp);
          m.tptp.add(tptp);
          m.tptpp.add(tptpp);
          m.ch.add(tp - tpp + tptp + tptpp, ia + ib);
        }
        return m;
      });

  BlockMoments total;
  for (const auto& b : blocks) total.merge(b);
  IntensityMoments out;
  out.i_a = total.i_a.estimate();
  out.i_b = total.i_b.estimate();
  out.i_ab_tp = total.tp.estimate();
  out.i_ab_tpp = total.tpp.estimate();
  out.i_ab_tptp = total.tptp.estimate();
  out.i_ab_tptpp = total.tptpp.estimate();
  out.ch = total.ch;
  return out;
}

IntensityValues intensity_moments_oracle(double kappa_t, const BellAngles& angles) {
  const DoubledCovariance c = pdc_doubled_covariance(1.0, kappa_t);
  const AnglesRad a = to_radians(angles);

  // Linear fields c+-, d+- (and sharp partners) over the doubled components.
  auto rotated = [&](bool sharp, std::size_t m1, std::size_t m2, double ang, bool plus) {
    auto idx = [&](std::size_t m) { return sharp ? c.alpha_sharp(m) : c.alpha(m); };
    LinearField f;
    if (plus)
      f.terms = {{idx(m1), std::cos(ang)}, {idx(m2), std::sin(ang)}};
    else
      f.terms = {{idx(m1), -std::sin(ang)}, {idx(m2), std::cos(ang)}};
    return f;
  };
  auto cfield = [&](bool sharp, double th, bool plus) { return rotated(sharp, kA1, kA2, th, plus); };
  auto dfield = [&](bool sharp, double ph, bool plus) { return rotated(sharp, kB1, kB2, ph, plus); };

  auto i_ab = [&](double th, double ph) {
    return wick_moment(c.entries, {cfield(false, th, true), cfield(true, th, true),
                                   dfield(false, ph, true), dfield(true, ph, true)});
  };
  auto i_a = [&](double th, double ph) {
    return i_ab(th, ph) + wick_moment(c.entries, {cfield(false, th, true), cfield(true, th, true),
                                                  dfield(false, ph, false), dfield(true, ph, false)});
  };
  auto i_b = [&](double th, double ph) {
    return i_ab(th, ph) + wick_moment(c.entries, {dfield(false, ph, true), dfield(true, ph, true),
                                                  cfield(false, th, false), cfield(true, th, false)});
  };

  IntensityValues v;
  v.i_a = i_a(a.tp, a.p);
  v.i_b = i_b(a.tp, a.p);
  v.i_ab_tp = i_ab(a.t, a.p);
  v.i_ab_tpp = i_ab(a.t, a.pp);
  v.i_ab_tptp = i_ab(a.tp, a.p);
  v.i_ab_tptpp = i_ab(a.tp, a.pp);
  return v;
}

RatioEstimate s_ch(const IntensityMoments& moments) { return moments.ch.ratio(); }

double s_ch_oracle(double kappa_t, const BellAngles& angles) {
  const IntensityValues v = intensity_moments_oracle(kappa_t, angles);
  const cplx num = v.i_ab_tp - v.i_ab_tpp + v.i_ab_tptp + v.i_ab_tptpp;
  const cplx den = v.i_a + v.i_b;
  if (std::abs(den) == 0.0) throw DegenerateError("s_ch_oracle: zero denominator");
  return std::real(num / den);
}

std::vector<BellRow> bell_sweep(const BellConfig& cfg) {
  cfg.validate();
  std::vector<BellRow> rows;
  rows.reserve(cfg.kappa_t.size());
  for (std::size_t r = 0; r < cfg.kappa_t.size(); ++r) {
    const double kt = cfg.kappa_t[r];
    BellRow row;
    row.kappa_t = kt;
    row.moments = intensity_moments_mc(cfg, kt, static_cast<std::uint32_t>(r));
    row.s_ch = s_ch(row.moments);
    row.oracle = intensity_moments_oracle(kt, cfg.angles);
    const double den = std::real(row.oracle.i_a + row.oracle.i_b);
    row.s_ch_oracle = den > 0.0 ? s_ch_oracle(kt, cfg.angles)
                                : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

void write_bell_csv(std::ostream& out, const BellConfig& cfg, const std::vector<BellRow>& rows) {
  out << "# experiment=bell\n"
      << "# sampler=" << (cfg.sampler == BellSampler::Contour ? "contour" : "equal_time") << '\n'
      << std::setprecision(17) << "# theta=" << cfg.angles.theta
      << " theta_prime=" << cfg.angles.theta_prime << " phi=" << cfg.angles.phi
      << " phi_prime=" << cfg.angles.phi_prime << '\n'
      << "kappa_t,s_ch_mean,s_ch_std,s_ch_oracle,i_a_mean,i_a_std,i_b_mean,i_b_std,"
         "i_ab_tt_mean,i_ab_tt_std,i_ab_ttp_mean,i_ab_ttp_std,i_ab_tpt_mean,i_ab_tpt_std,"
         "i_ab_tptp_mean,i_ab_tptp_std,n_samples,seed\n";
  for (const BellRow& r : rows) {
    const IntensityMoments& m = r.moments;
    out << r.kappa_t << ',' << std::real(r.s_ch.value.mean) << ',' << r.s_ch.value.std_of_mean
        << ',' << r.s_ch_oracle;
    for (const MCEstimate* e : {&m.i_a, &m.i_b, &m.i_ab_tp, &m.i_ab_tpp, &m.i_ab_tptp, &m.i_ab_tptpp})
      out << ',' << std::real(e->mean) << ',' << e->std_of_mean;
    out << ',' << cfg.n_samples << ',' << cfg.master_seed << '\n';
  }
}

}  // namespace qtraj
