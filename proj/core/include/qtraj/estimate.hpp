#pragma once

#include <complex>
#include <cstdint>
#include <span>

namespace qtraj {

struct MCEstimate {
  std::complex<double> mean;
  double std_of_mean = 0.0;
  std::int64_t n_samples = 0;
};

// Single-pass mean and second central moment (sum |x - mean|^2) of complex
// samples. merge() uses the pairwise update, so
// accumulators can be combined in any grouping.
class Accumulator {
 public:
  void add(std::complex<double> x);
  void merge(const Accumulator& other);

  std::int64_t count() const { return n_; }
  std::complex<double> mean() const { return mean_; }
  // Unbiased sample variance of |x|; requires count() >= 2.
  double variance() const;
  // Throws std::domain_error for fewer than 2 samples.
  MCEstimate estimate() const;

 private:
  std::int64_t n_ = 0;
  std::complex<double> mean_{};
  double m2_ = 0.0;
};

MCEstimate mc_mean(std::span<const std::complex<double>> samples);

struct RatioEstimate {
  MCEstimate value;
  bool degenerate = false;
  double delta_std = 0.0;  // first-order propagated error, kept even when degenerate
};

// Joint accumulator for numerator/denominator pairs from the same samples.
// The ratio of means carries a first-order (delta method) error that includes
// the numerator/denominator covariance.
class RatioAccumulator {
 public:
  void add(std::complex<double> numerator, std::complex<double> denominator);
  void merge(const RatioAccumulator& other);

  std::int64_t count() const { return n_; }
  MCEstimate numerator() const;
  MCEstimate denominator() const;

  // If |mean(den)| <= 2 std_of_mean(den), the result is flagged degenerate
  // and std_of_mean is +inf.
  RatioEstimate ratio() const;

 private:
  std::int64_t n_ = 0;
  std::complex<double> mean_num_{};
  std::complex<double> mean_den_{};
  double m2_num_ = 0.0;
  double m2_den_ = 0.0;
  std::complex<double> co_{};  // sum (num - mean) conj(den - mean)
};

}  // namespace qtraj
