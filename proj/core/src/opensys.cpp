#include "qtraj/opensys.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qtraj/errors.hpp"
#include "qtraj/parallel.hpp"
#include "qtraj/sampling.hpp"

namespace qtraj {

namespace {

constexpr cplx kI{0.0, 1.0};

// phi_1(z) = (e^z - 1)/z and phi_2(z) = (phi_1(z) - 1)/z.
std::pair<cplx, cplx> phi12(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx p1{}, p2{}, term{1.0, 0.0};
    double fact1 = 1.0, fact2 = 2.0;  // (k+1)!, (k+2)!
    for (int k = 0; k < 20; ++k) {
      p1 += term / fact1;
      p2 += term / fact2;
      term *= z;
      fact1 *= k + 2;
      fact2 *= k + 3;
    }
    return {p1, p2};
  }
  const cplx p1 = (std::exp(z) - 1.0) / z;
  return {p1, (p1 - 1.0) / z};
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

Integrator OpenSystemConfig::resolved_integrator() const {
  if (integrator != Integrator::Auto) return integrator;
  return mode == EvolutionMode::Coherent ? Integrator::Euler : Integrator::Exponential;
}

void OpenSystemConfig::validate() const {
  for (double v : {epsilon, omega, coupling})
    if (!std::isfinite(v)) throw std::invalid_argument("opensys: parameters must be finite");
  if (!(t_final > 0.0) || !std::isfinite(t_final))
    throw std::invalid_argument("opensys: t_final must be positive");
  if (steps == 0) throw std::invalid_argument("opensys: steps must be positive");
  if (n_samples < 2) throw std::invalid_argument("opensys: n_samples must be >= 2");
  if (mode == EvolutionMode::Fock && n_max < 2)
    throw std::invalid_argument("opensys: n_max must be >= 2");
  if (output_stride == 0) throw std::invalid_argument("opensys: output_stride must be >= 1");
  if (n_workers == 0) throw std::invalid_argument("opensys: n_workers must be >= 1");
  if (!finite(initial_amplitude))
    throw std::invalid_argument("opensys: initial amplitude must be finite");
}

namespace {

NoiseTrajectory noise_from_nodes(const ContourGrid& grid, const cplx* alpha,
                                 const cplx* alpha_sharp) {
  const std::size_t p = grid.steps();
  NoiseTrajectory n;
  n.alpha_plus.resize(p + 1);
  n.alpha_minus.resize(p + 1);
  n.alpha_sharp_plus.resize(p + 1);
  n.alpha_sharp_minus.resize(p + 1);
  for (std::size_t j = 0; j <= p; ++j) {
    const std::size_t f = grid.forward_node(j), b = grid.backward_node(j);
    n.alpha_plus[j] = alpha[f];
    n.alpha_minus[j] = alpha[b];
    n.alpha_sharp_plus[j] = alpha_sharp[f];
    n.alpha_sharp_minus[j] = alpha_sharp[b];
  }
  return n;
}

}  // namespace

NoiseTrajectory noise_from_contour(const ContourGrid& grid, const ComplexVector& alpha,
                                   const ComplexVector& alpha_sharp) {
  if (static_cast<std::size_t>(alpha.size()) != grid.size() ||
      static_cast<std::size_t>(alpha_sharp.size()) != grid.size())
    throw std::invalid_argument("noise_from_contour: field length does not match the grid");
  return noise_from_nodes(grid, alpha.data(), alpha_sharp.data());
}

NoiseTrajectory generate_base_noise(const BathFactorization& f, RngStream& rng,
                                    BathFactorization::Workspace& ws) {
  const std::size_t n = f.dimension();
  std::vector<cplx> gamma(n), alpha(n), alpha_sharp(n);
  const ComplexVector g = sample_gamma(n, rng);
  std::copy(g.data(), g.data() + n, gamma.begin());
  f.apply(gamma, alpha, alpha_sharp, ws);
  return noise_from_nodes(f.grid(), alpha.data(), alpha_sharp.data());
}

NoiseTrajectory generate_base_noise(const ContourGrid& grid, const Factorization& f,
                                    RngStream& rng) {
  if (f.dimension() != grid.size())
    throw std::invalid_argument("generate_base_noise: factorization does not match the grid");
  const QuasiTrajectory q = sample_quasitrajectory(f, rng);
  return noise_from_contour(grid, q.alpha, q.alpha_sharp);
}

CoherentPair step_coherent(const CoherentPair& pair, const NodeNoise& noise, double epsilon,
                           double h, double dt, Integrator integrator) {
  const cplx beta = pair.b_plus;
  const cplx big_b = std::conj(pair.b_minus);
  const cplx da = noise.alpha_minus - noise.alpha_plus;
  const cplx ds = noise.alpha_sharp_minus - noise.alpha_sharp_plus;
  CoherentPair out;
  if (integrator != Integrator::Exponential) {
    out.b_plus = beta + dt * (-kI * epsilon * beta - kI * h * noise.alpha_sharp_plus);
    out.b_minus = std::conj(big_b + dt * (kI * epsilon * big_b + kI * h * noise.alpha_minus));
    out.log_overlap = pair.log_overlap + kI * h * dt * (beta * da + big_b * ds);
    return out;
  }
  const cplx z = -kI * epsilon * dt;
  const auto [p1, p2] = phi12(z);
  const auto [q1, q2] = phi12(-z);
  const cplx src_plus = -kI * h * noise.alpha_sharp_plus;
  const cplx src_minus = kI * h * noise.alpha_minus;
  out.b_plus = std::exp(z) * beta + src_plus * dt * p1;
  const cplx big_b1 = std::exp(-z) * big_b + src_minus * dt * q1;
  out.b_minus = std::conj(big_b1);
  const cplx int_beta = beta * dt * p1 + src_plus * dt * dt * p2;
  const cplx int_b = big_b * dt * q1 + src_minus * dt * dt * q2;
  out.log_overlap = pair.log_overlap + kI * h * (da * int_beta + ds * int_b);
  return out;
}

cplx overlap(const CoherentPair& pair) { return std::exp(pair.log_overlap); }

std::pair<cplx, cplx> mean_system_ops(const CoherentPair& pair) {
  return {pair.b_plus, std::conj(pair.b_minus)};
}

FockOperators::FockOperators(std::size_t n)
    : n_max(n),
      annihilation(ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
      number(ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))) {
  if (n < 2) throw std::invalid_argument("FockOperators: n_max must be >= 2");
  for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(n); ++k)
    annihilation(k - 1, k) = std::sqrt(static_cast<double>(k));
  creation = annihilation.adjoint();
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k)
    number(k, k) = static_cast<double>(k);
}

ComplexVector coherent_state(const FockOperators& ops, cplx amplitude) {
  ComplexVector v(static_cast<Eigen::Index>(ops.n_max));
  cplx c{1.0, 0.0};
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k > 0) c *= amplitude / std::sqrt(static_cast<double>(k));
    v(k) = c;
  }
  return v / v.norm();
}

namespace {

// exp(-i H dt) v by a Taylor series; H is small and dense.
ComplexVector expm_apply(const ComplexMatrix& h, const ComplexVector& v, double dt) {
  ComplexVector result = v;
  ComplexVector term = v;
  const double scale = v.norm();
  for (int k = 1; k < 200; ++k) {
    term = (-kI * dt / static_cast<double>(k)) * (h * term);
    result += term;
    if (term.norm() <= 1e-17 * std::max(scale, 1e-300)) break;
  }
  return result;
}

bool state_diverged(const ComplexVector& v) {
  const double n = v.norm();
  return !std::isfinite(n) || n > kDivergentNorm;
}

}  // namespace

StatePair step_general(const StatePair& pair, const NodeNoise& noise, const ComplexMatrix& h_q,
                       const FockOperators& ops, double h, double dt, Integrator integrator) {
  if (pair.divergent) return pair;
  const ComplexMatrix h_plus =
      h_q + h * (noise.alpha_plus * ops.annihilation + noise.alpha_sharp_plus * ops.creation);
  // Ket of <Psi-| evolves with the adjoint of the backward-branch generator.
  const ComplexMatrix h_minus_adj =
      h_q.adjoint() + h * (std::conj(noise.alpha_minus) * ops.creation +
                           std::conj(noise.alpha_sharp_minus) * ops.annihilation);
  StatePair out;
  if (integrator == Integrator::Euler) {
    out.psi_plus = pair.psi_plus - kI * dt * (h_plus * pair.psi_plus);
    out.psi_minus = pair.psi_minus - kI * dt * (h_minus_adj * pair.psi_minus);
  } else {
    out.psi_plus = expm_apply(h_plus, pair.psi_plus, dt);
    out.psi_minus = expm_apply(h_minus_adj, pair.psi_minus, dt);
  }
  out.divergent = state_diverged(out.psi_plus) || state_diverged(out.psi_minus);
  return out;
}

cplx overlap(const StatePair& pair) {
  const cplx ov = pair.psi_minus.dot(pair.psi_plus);
  if (!(std::abs(ov) >= 1e-300)) throw DegenerateError("overlap <Psi-|Psi+> vanishes");
  return ov;
}

std::pair<cplx, cplx> mean_system_ops(const StatePair& pair, const FockOperators& ops) {
  const cplx ov = overlap(pair);
  return {pair.psi_minus.dot(ops.annihilation * pair.psi_plus) / ov,
          pair.psi_minus.dot(ops.creation * pair.psi_plus) / ov};
}

std::size_t shift_history_requirement(const ContourGrid& grid, std::size_t node) {
  return grid.time_index(node) + 1;
}

std::pair<cplx, cplx> compute_shift(const ContourGrid& grid, const GreenMatrix& g,
                                    const ShiftHistory& history, std::size_t node,
                                    double coupling) {
  if (g.modes != 1 || g.nodes != grid.size())
    throw std::invalid_argument("compute_shift: Green matrix does not match the grid");
  const std::size_t j = grid.time_index(node);
  const std::size_t need = shift_history_requirement(grid, node);
  if (history.b_bar.size() < need || history.b_bar_plus.size() < need)
    throw SequencingError("compute_shift: node at step " + std::to_string(j) + " needs " +
                          std::to_string(need) + " history entries, have " +
                          std::to_string(std::min(history.b_bar.size(), history.b_bar_plus.size())));
  const double w = coupling * grid.dt();
  const bool forward = grid.branch(node) == Branch::Forward;
  auto entry = [&](std::size_t l, std::size_t p) {
    return g.entries(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(p));
  };
  // Backward-branch sources at step k pair with forward ones at the same
  // step; for k later than node's time they cancel, leaving the causal sums.
  cplx f{}, f_sharp{};
  const std::size_t f_end = forward ? j : j + 1;
  for (std::size_t k = 0; k < f_end; ++k)
    f += entry(grid.backward_node(k), node) * (kI * w * history.b_bar_plus[k]);
  const std::size_t s_end = forward ? j + 1 : j;
  for (std::size_t k = 0; k < s_end; ++k)
    f_sharp += entry(node, grid.forward_node(k)) * (-kI * w * history.b_bar[k]);
  return {f, f_sharp};
}

BathShift::BathShift(double omega, double coupling, double dt)
    : rotate_plus_(std::exp(kI * omega * dt)),
      rotate_minus_(std::exp(-kI * omega * dt)),
      weight_(coupling * dt) {}

NodeNoise BathShift::shifts(cplx b_bar, cplx b_bar_plus) const {
  const cplx c = kI * weight_;
  return {c * sum_plus_, c * (sum_plus_ + b_bar_plus), -c * (sum_minus_ + b_bar),
          -c * sum_minus_};
}

void BathShift::advance(cplx b_bar, cplx b_bar_plus) {
  sum_plus_ = rotate_plus_ * (sum_plus_ + b_bar_plus);
  sum_minus_ = rotate_minus_ * (sum_minus_ + b_bar);
}

MeasureRatio::MeasureRatio(double omega, double dt) : omega_(omega), dt_(dt) {}

void MeasureRatio::Form::extend(std::size_t j, cplx u_f, cplx y_f, cplx u_b, cplx y_b) {
  if (j == 0) {
    value += u_f * y_f + u_b * (y_b - y_f);
  } else {
    value += u_f * (y_f - y_forward) + u_b * (y_b - y_f) + u_backward * (y_forward - y_b);
  }
  y_forward = y_f;
  y_backward = y_b;
  u_backward = u_b;
}

void MeasureRatio::add_step(std::size_t j, const NodeNoise& base, const NodeNoise& shift) {
  const double t = static_cast<double>(j) * dt_;
  const cplx down = std::exp(-kI * omega_ * t);
  const cplx up = std::conj(down);
  base_.extend(j, base.alpha_plus * down, base.alpha_sharp_plus * up, base.alpha_minus * down,
               base.alpha_sharp_minus * up);
  const NodeNoise s = base + shift;
  shifted_.extend(j, s.alpha_plus * down, s.alpha_sharp_plus * up, s.alpha_minus * down,
                  s.alpha_sharp_minus * up);
}

std::vector<std::size_t> output_steps(const OpenSystemConfig& cfg) {
  if (cfg.output_stride == 0) throw std::invalid_argument("output_stride must be >= 1");
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j <= cfg.steps; j += cfg.output_stride) out.push_back(j);
  if (out.back() != cfg.steps) out.push_back(cfg.steps);
  return out;
}

namespace {

// Common driver for both evolution modes. State provides means(),
// log_overlap(), number_ratio(), step(noise) and ok().
template <class State>
TrajectoryRecord sweep(const OpenSystemConfig& cfg, const NoiseTrajectory& noise, State& state) {
  if (noise.size() != cfg.steps + 1)
    throw std::invalid_argument("simulate_trajectory: noise length does not match steps");
  const double dt = cfg.dt();
  const std::vector<std::size_t> outputs = output_steps(cfg);
  TrajectoryRecord rec;
  rec.reserve(outputs.size());
  std::size_t next_out = 0;
  BathShift shift(cfg.omega, cfg.coupling, dt);
  MeasureRatio ratio(cfg.omega, dt);
  bool alive = true;

  auto record = [&](std::size_t j) {
    NodeRecord r;
    r.t = static_cast<double>(j) * dt;
    r.finite = false;
    if (alive) {
      try {
        const auto [b, bp] = state.means();
        r.b_bar = b;
        r.b_bar_plus = bp;
        r.number_ratio = state.number_ratio();
        r.log_overlap = state.log_overlap();
        r.log_weight = r.log_overlap + ratio.log_ratio();
        r.finite = finite(r.b_bar) && finite(r.b_bar_plus) && finite(r.number_ratio) &&
                   finite(r.log_overlap) && finite(r.log_weight);
      } catch (const DegenerateError&) {
        r.finite = false;
      }
    }
    rec.push_back(r);
  };

  record(0);
  ++next_out;
  for (std::size_t j = 0; j < cfg.steps; ++j) {
    if (alive) {
      NodeNoise total = noise.at(j);
      try {
        if (cfg.shift_enabled) {
          const auto [b, bp] = state.means();
          const NodeNoise s = shift.shifts(b, bp);
          shift.advance(b, bp);
          ratio.add_step(j, total, s);
          total = total + s;
        }
        state.step(total, dt);
        alive = state.ok();
      } catch (const DegenerateError&) {
        alive = false;
      }
    }
    if (next_out < outputs.size() && outputs[next_out] == j + 1) {
      record(j + 1);
      ++next_out;
    }
  }
  return rec;
}

struct CoherentState {
  CoherentPair pair;
  const OpenSystemConfig& cfg;

  std::pair<cplx, cplx> means() const { return mean_system_ops(pair); }
  cplx number_ratio() const { return pair.b_plus * std::conj(pair.b_minus); }
  cplx log_overlap() const { return pair.log_overlap; }
  void step(const NodeNoise& n, double dt) {
    pair = step_coherent(pair, n, cfg.epsilon, cfg.coupling, dt, cfg.resolved_integrator());
  }
  bool ok() const {
    return finite(pair.b_plus) && finite(pair.b_minus) && finite(pair.log_overlap);
  }
};

struct FockState {
  StatePair pair;
  const FockOperators& ops;
  ComplexMatrix h_q;
  const OpenSystemConfig& cfg;

  std::pair<cplx, cplx> means() const { return mean_system_ops(pair, ops); }
  cplx number_ratio() const { return pair.psi_minus.dot(ops.number * pair.psi_plus) / overlap(pair); }
  cplx log_overlap() const { return std::log(overlap(pair)); }
  void step(const NodeNoise& n, double dt) {
    pair = step_general(pair, n, h_q, ops, cfg.coupling, dt, cfg.resolved_integrator());
  }
  bool ok() const { return !pair.divergent; }
};

}  // namespace

TrajectoryRecord simulate_trajectory(const OpenSystemConfig& cfg, const NoiseTrajectory& noise) {
  if (cfg.mode == EvolutionMode::Coherent) {
    CoherentState s{{cfg.initial_amplitude, cfg.initial_amplitude, {}}, cfg};
    return sweep(cfg, noise, s);
  }
  const FockOperators ops(cfg.n_max);
  const ComplexVector psi0 = coherent_state(ops, cfg.initial_amplitude);
  FockState s{{psi0, psi0, false}, ops, cfg.epsilon * ops.number, cfg};
  return sweep(cfg, noise, s);
}

TrajectoryRecord simulate_trajectory(const OpenSystemConfig& cfg, const BathFactorization& f,
                                     std::uint64_t index, BathFactorization::Workspace& ws) {
  if (f.grid().steps() != cfg.steps || f.grid().t_final() != cfg.t_final)
    throw std::invalid_argument("simulate_trajectory: bath grid does not match the config");
  RngStream rng(cfg.master_seed, index);
  return simulate_trajectory(cfg, generate_base_noise(f, rng, ws));
}

cplx observable_value(const NodeRecord& r, Observable o, bool normalized) {
  cplx ratio{1.0, 0.0};
  switch (o) {
    case Observable::Identity: ratio = 1.0; break;
    case Observable::Annihilation: ratio = r.b_bar; break;
    case Observable::Number: ratio = r.number_ratio; break;
  }
  return normalized ? ratio : ratio * std::exp(r.log_weight);
}

std::vector<MCEstimate> estimate_observable(std::span<const TrajectoryRecord> trajectories,
                                            Observable o, bool normalized) {
  if (trajectories.size() < 2)
    throw std::invalid_argument("estimate_observable: need at least 2 trajectories");
  const std::size_t nodes = trajectories.front().size();
  std::vector<Accumulator> acc(nodes);
  for (const auto& tr : trajectories) {
    if (tr.size() != nodes) throw std::invalid_argument("estimate_observable: ragged records");
    for (std::size_t k = 0; k < nodes; ++k) {
      if (!tr[k].finite) continue;
      const cplx v = observable_value(tr[k], o, normalized);
      if (finite(v)) acc[k].add(v);
    }
  }
  std::vector<MCEstimate> out;
  out.reserve(nodes);
  for (const auto& a : acc) out.push_back(a.estimate());
  return out;
}

namespace {

struct NodeAccumulators {
  Accumulator re_b, im_b, norm, log_weight, log_overlap;

  void merge(const NodeAccumulators& o) {
    re_b.merge(o.re_b);
    im_b.merge(o.im_b);
    norm.merge(o.norm);
    log_weight.merge(o.log_weight);
    log_overlap.merge(o.log_overlap);
  }
};

struct BlockResult {
  std::vector<NodeAccumulators> nodes;
  std::int64_t divergent = 0;
};

double variance_or_nan(const Accumulator& a) {
  return a.count() >= 2 ? a.variance() : std::numeric_limits<double>::quiet_NaN();
}

MCEstimate estimate_or_nan(const Accumulator& a) {
  if (a.count() >= 2) return a.estimate();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {{nan, nan}, nan, a.count()};
}

}  // namespace

OpenSystemResult run_opensystem(const OpenSystemConfig& cfg) {
  cfg.validate();
  const ContourGrid grid(cfg.t_final, cfg.steps);
  const BathFactorization bath(grid, cfg.omega);
  const std::vector<std::size_t> outputs = output_steps(cfg);
  // Shifted noise uses the normalized estimator; unshifted noise carries the
  // overlap factor.
  const bool normalized = cfg.shift_enabled;

  auto blocks = run_blocks<BlockResult>(
      static_cast<std::size_t>(cfg.n_samples), cfg.n_workers,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        BlockResult res;
        res.nodes.resize(outputs.size());
        auto ws = bath.make_workspace();
        for (std::size_t i = begin; i < end; ++i) {
          const TrajectoryRecord rec = simulate_trajectory(cfg, bath, i, ws);
          bool any_bad = false;
          for (std::size_t k = 0; k < rec.size(); ++k) {
            const NodeRecord& r = rec[k];
            const cplx b = observable_value(r, Observable::Annihilation, normalized);
            const cplx w = std::exp(r.log_weight);
            if (!r.finite || !finite(b) || !finite(w)) {
              any_bad = true;
              continue;
            }
            NodeAccumulators& a = res.nodes[k];
            a.re_b.add(b.real());
            a.im_b.add(b.imag());
            a.norm.add(w);
            a.log_weight.add(r.log_weight.real());
            a.log_overlap.add(r.log_overlap.real());
          }
          if (any_bad) ++res.divergent;
        }
        return res;
      });

  std::vector<NodeAccumulators> total(outputs.size());
  OpenSystemResult result;
  for (const auto& b : blocks) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k].merge(b.nodes[k]);
    result.n_divergent += b.divergent;
  }
  for (std::size_t k = 0; k < total.size(); ++k) {
    result.times.push_back(static_cast<double>(outputs[k]) * cfg.dt());
    result.re_b.push_back(estimate_or_nan(total[k].re_b));
    result.im_b.push_back(estimate_or_nan(total[k].im_b));
    result.norm.push_back(estimate_or_nan(total[k].norm));
    result.overlap_logvar.push_back(variance_or_nan(total[k].log_weight));
    result.raw_overlap_logvar.push_back(variance_or_nan(total[k].log_overlap));
  }
  return result;
}

void write_opensys_csv(std::ostream& out, const OpenSystemConfig& cfg,
                       const OpenSystemResult& result) {
  out << std::setprecision(17) << "# experiment=opensys\n"
      << "# epsilon=" << cfg.epsilon << " omega=" << cfg.omega << " coupling=" << cfg.coupling
      << " t_final=" << cfg.t_final << " steps=" << cfg.steps << '\n'
      << "# n_samples=" << cfg.n_samples << " seed=" << cfg.master_seed
      << " shift=" << (cfg.shift_enabled ? "on" : "off")
      << " mode=" << (cfg.mode == EvolutionMode::Coherent ? "coherent" : "fock")
      << " integrator=" << (cfg.resolved_integrator() == Integrator::Exponential ? "exponential" : "euler")
      << '\n'
      << "# divergent_trajectories=" << result.n_divergent << '\n'
      << "t,re_b_mean,re_b_std,im_b_mean,im_b_std,overlap_logvar\n";
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    out << result.times[k] << ',' << result.re_b[k].mean.real() << ','
        << result.re_b[k].std_of_mean << ',' << result.im_b[k].mean.real() << ','
        << result.im_b[k].std_of_mean << ',' << result.overlap_logvar[k] << '\n';
  }
}

}  // namespace qtraj
