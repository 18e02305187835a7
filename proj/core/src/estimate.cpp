#include "qtraj/estimate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qtraj {

using cplx = std::complex<double>;

void Accumulator::add(cplx x) {
  ++n_;
  const cplx delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += std::real(delta * std::conj(x - mean_));
}

void Accumulator::merge(const Accumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const cplx delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  m2_ += other.m2_ + std::norm(delta) * na * nb / n;
  n_ += other.n_;
}

double Accumulator::variance() const {
  if (n_ < 2) throw std::domain_error("variance needs at least 2 samples");
  return m2_ / static_cast<double>(n_ - 1);
}

MCEstimate Accumulator::estimate() const {
  return {mean_, std::sqrt(variance() / static_cast<double>(n_)), n_};
}

MCEstimate mc_mean(std::span<const cplx> samples) {
  Accumulator acc;
  for (cplx x : samples) acc.add(x);
  return acc.estimate();
}

void RatioAccumulator::add(cplx numerator, cplx denominator) {
  RatioAccumulator one;
  one.n_ = 1;
  one.mean_num_ = numerator;
  one.mean_den_ = denominator;
  merge(one);
}

void RatioAccumulator::merge(const RatioAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const cplx dn = other.mean_num_ - mean_num_;
  const cplx dd = other.mean_den_ - mean_den_;
  const double w = na * nb / n;
  mean_num_ += dn * (nb / n);
  mean_den_ += dd * (nb / n);
  m2_num_ += other.m2_num_ + std::norm(dn) * w;
  m2_den_ += other.m2_den_ + std::norm(dd) * w;
  co_ += other.co_ + dn * std::conj(dd) * w;
  n_ += other.n_;
}

namespace {

double std_of_mean(double m2, std::int64_t n) {
  if (n < 2) throw std::domain_error("estimate needs at least 2 samples");
  const double dn = static_cast<double>(n);
  return std::sqrt(std::max(m2, 0.0) / (dn - 1.0) / dn);
}

}  // namespace

MCEstimate RatioAccumulator::numerator() const {
  return {mean_num_, std_of_mean(m2_num_, n_), n_};
}

MCEstimate RatioAccumulator::denominator() const {
  return {mean_den_, std_of_mean(m2_den_, n_), n_};
}

RatioEstimate RatioAccumulator::ratio() const {
  const double den_std = std_of_mean(m2_den_, n_);
  const double den_abs = std::abs(mean_den_);
  RatioEstimate r;
  r.value.n_samples = n_;
  if (den_abs == 0.0) {
    r.degenerate = true;
    r.value.mean = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    r.value.std_of_mean = r.delta_std = std::numeric_limits<double>::infinity();
    return r;
  }
  const cplx s = mean_num_ / mean_den_;
  const double resid = m2_num_ + std::norm(s) * m2_den_ - 2.0 * std::real(std::conj(s) * co_);
  r.value.mean = s;
  r.delta_std = std_of_mean(resid, n_) / den_abs;
  r.degenerate = den_abs <= 2.0 * den_std;
  r.value.std_of_mean = r.degenerate ? std::numeric_limits<double>::infinity() : r.delta_std;
  return r;
}

}  // namespace qtraj
