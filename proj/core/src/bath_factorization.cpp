#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

#include "qtraj/factorization.hpp"

namespace qtraj {

struct BathFactorization::Plans {
  fftw_plan forward = nullptr;   // sum_k x_k exp(-2 pi i j k / N)
  fftw_plan backward = nullptr;  // sum_k x_k exp(+2 pi i j k / N)

  explicit Plans(std::size_t len) {
    std::vector<cplx> a(len), b(len);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const int n = static_cast<int>(len);
    forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!forward || !backward) throw std::runtime_error("fftw plan creation failed");
  }
  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

BathFactorization::Workspace::Workspace(std::size_t fft_length)
    : in(fft_length), out(fft_length) {}

BathFactorization::BathFactorization(const ContourGrid& grid, double omega)
    : grid_(grid), omega_(omega), n_(grid.size()), fft_length_(2 * grid.size() + 1) {
  if (!std::isfinite(omega)) throw std::invalid_argument("bath: omega must be finite");
  const double len = static_cast<double>(fft_length_);
  const double a = 2.0 / std::sqrt(len);
  sigma_.resize(n_);
  scale_.resize(n_);
  phase_.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    const double theta = (2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi / len;
    sigma_[k] = 1.0 / (2.0 * std::sin(theta / 2.0));
    scale_[k] = a * std::sqrt(sigma_[k]);
  }
  for (std::size_t l = 0; l < n_; ++l)
    phase_[l] = std::exp(cplx(0.0, -omega * grid.time(l)));
  plans_ = std::make_unique<Plans>(fft_length_);
}

BathFactorization::~BathFactorization() = default;
BathFactorization::BathFactorization(BathFactorization&&) noexcept = default;
BathFactorization& BathFactorization::operator=(BathFactorization&&) noexcept = default;

void BathFactorization::apply(std::span<const cplx> gamma, std::span<cplx> alpha,
                              std::span<cplx> alpha_sharp, Workspace& ws) const {
  if (gamma.size() != n_ || alpha.size() != n_ || alpha_sharp.size() != n_)
    throw std::invalid_argument("bath apply: size mismatch");
  if (ws.in.size() != fft_length_) throw std::invalid_argument("bath apply: workspace size");

  const std::size_t len = fft_length_;
  const double dlen = static_cast<double>(len);
  auto* in = reinterpret_cast<fftw_complex*>(ws.in.data());
  auto* out = reinterpret_cast<fftw_complex*>(ws.out.data());
  std::fill(ws.in.begin(), ws.in.end(), cplx{});

  // alpha#_l = phase_l * sum_k scale_k conj(gamma_k) sin((l+1) theta_k)
  for (std::size_t k = 0; k < n_; ++k) ws.in[k] = scale_[k] * std::conj(gamma[k]);
  fftw_execute_dft(plans_->backward, in, out);
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t m = j + 1;
    const cplx up = std::exp(cplx(0.0, std::numbers::pi * static_cast<double>(m) / dlen));
    const cplx s = (up * ws.out[m] - std::conj(up) * ws.out[len - m]) / cplx(0.0, 2.0);
    alpha_sharp[j] = phase_[j] * s;
  }

  // alpha_l = conj(phase_l) * sum_k scale_k gamma_k cos((l+1/2) theta_k)
  for (std::size_t k = 0; k < n_; ++k)
    ws.in[k] = scale_[k] * gamma[k] *
               std::exp(cplx(0.0, std::numbers::pi * static_cast<double>(k) / dlen));
  fftw_execute_dft(plans_->backward, in, out);
  for (std::size_t j = 0; j < n_; ++j) {
    const cplx tw =
        std::exp(cplx(0.0, std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) / (2.0 * dlen)));
    alpha[j] = 0.5 * tw * ws.out[j];
  }
  for (std::size_t k = 0; k < n_; ++k)
    ws.in[k] = scale_[k] * gamma[k] *
               std::exp(cplx(0.0, -std::numbers::pi * static_cast<double>(k) / dlen));
  fftw_execute_dft(plans_->forward, in, out);
  for (std::size_t j = 0; j < n_; ++j) {
    const cplx tw = std::exp(
        cplx(0.0, -std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) / (2.0 * dlen)));
    alpha[j] = std::conj(phase_[j]) * (alpha[j] + 0.5 * tw * ws.out[j]);
  }
}

Factorization BathFactorization::dense() const {
  const double len = static_cast<double>(fft_length_);
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  Factorization f;
  f.rank_tol = 0.0;
  f.U.resize(n, n);
  f.W.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double theta = (2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi / len;
    for (Eigen::Index l = 0; l < n; ++l) {
      const double dl = static_cast<double>(l);
      f.U(l, k) = phase_[l] * scale_[k] * std::sin((dl + 1.0) * theta);
      f.W(k, l) = std::conj(phase_[l]) * scale_[k] * std::cos((dl + 0.5) * theta);
    }
  }
  return f;
}

}  // namespace qtraj
