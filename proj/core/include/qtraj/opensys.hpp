#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "qtraj/contour.hpp"
#include "qtraj/estimate.hpp"
#include "qtraj/factorization.hpp"
#include "qtraj/green.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

enum class EvolutionMode { Coherent, Fock };

enum class Integrator {
  Euler,        // with the shift, weight * overlap reduces exactly to
                // exp(-h^2 dt^2 sum_j b-bar^+_j b-bar_j)
  Exponential,  // exact solution of each step with the noise held constant
  Auto,         // Euler in coherent mode; Exponential in Fock mode, where the
                // explicit step is unstable on the truncated operators
};

// System H_q = epsilon b^dag b coupled by h (b^dag a + b a^dag) to one bath
// mode H_b = omega a^dag a in its vacuum; the system starts in the coherent
// state |b0>.
struct OpenSystemConfig {
  double epsilon = 1.0;
  double omega = 1.0;
  double coupling = 2.0;
  double t_final = 10.0;
  std::size_t steps = 10000;
  std::int64_t n_samples = 10000;
  std::uint64_t master_seed = 1;
  bool shift_enabled = true;
  EvolutionMode mode = EvolutionMode::Coherent;
  std::size_t n_max = 20;
  cplx initial_amplitude{1.0, 0.0};
  std::size_t output_stride = 1;  // record every k-th time step (P always kept)
  Integrator integrator = Integrator::Auto;
  unsigned n_workers = 1;

  double dt() const { return t_final / static_cast<double>(steps); }
  Integrator resolved_integrator() const;
  void validate() const;
};

// Noise seen by the system at one real-time step: fields on the forward (+)
// and backward (-) branch.
struct NodeNoise {
  cplx alpha_plus, alpha_minus, alpha_sharp_plus, alpha_sharp_minus;

  NodeNoise operator+(const NodeNoise& o) const {
    return {alpha_plus + o.alpha_plus, alpha_minus + o.alpha_minus,
            alpha_sharp_plus + o.alpha_sharp_plus,
            alpha_sharp_minus + o.alpha_sharp_minus};
  }
};

// Base (unshifted) bath fields indexed by real-time step j = 0..P, read off a
// contour-indexed quasitrajectory: plus = forward node j, minus = backward
// node at the same time.
struct NoiseTrajectory {
  std::vector<cplx> alpha_plus, alpha_minus, alpha_sharp_plus, alpha_sharp_minus;

  std::size_t size() const { return alpha_plus.size(); }
  NodeNoise at(std::size_t j) const {
    return {alpha_plus[j], alpha_minus[j], alpha_sharp_plus[j], alpha_sharp_minus[j]};
  }
};

NoiseTrajectory noise_from_contour(const ContourGrid& grid, const ComplexVector& alpha,
                                   const ComplexVector& alpha_sharp);

// Draws gamma from the stream and maps it through the bath factorization.
NoiseTrajectory generate_base_noise(const BathFactorization& f, RngStream& rng,
                                    BathFactorization::Workspace& ws);
NoiseTrajectory generate_base_noise(const ContourGrid& grid, const Factorization& f,
                                    RngStream& rng);

// Coherent-state unraveling. b_plus is the displacement of |Psi+>, b_minus
// that of |Psi->; log_overlap = log <Psi-|Psi+> (absorbs the normalization
// factors Omega_pm).
struct CoherentPair {
  cplx b_plus;
  cplx b_minus;
  cplx log_overlap{0.0, 0.0};
};

// One step of
//   d b+      = -i eps b+ dt - i h alpha#+ dt
//   d conj(b-) = +i eps conj(b-) dt + i h alpha- dt
//   d log<Psi-|Psi+> = i h [ b+ (alpha- - alpha+) + conj(b-) (alpha#- - alpha#+) ] dt
CoherentPair step_coherent(const CoherentPair& pair, const NodeNoise& noise, double epsilon,
                           double h, double dt, Integrator integrator = Integrator::Euler);

cplx overlap(const CoherentPair& pair);
// (b-bar, b-bar^+) = (b+, conj(b-)).
std::pair<cplx, cplx> mean_system_ops(const CoherentPair& pair);

// Truncated number-basis operators of dimension n_max (states |0>..|n_max-1>).
struct FockOperators {
  explicit FockOperators(std::size_t n_max);

  std::size_t n_max;
  ComplexMatrix annihilation;
  ComplexMatrix creation;
  ComplexMatrix number;
};

ComplexVector coherent_state(const FockOperators& ops, cplx amplitude);

// Branch kets; the bra <Psi-| is psi_minus^dag.
struct StatePair {
  ComplexVector psi_plus;
  ComplexVector psi_minus;
  bool divergent = false;
};

inline constexpr double kDivergentNorm = 1e30;

// d|Psi+> = -i dt [H_q + h(alpha+ b + alpha#+ b^dag)] |Psi+>
// d<Psi-| = +i dt <Psi-| [H_q + h(alpha- b + alpha#- b^dag)]
// Sets `divergent` once either state norm exceeds kDivergentNorm.
StatePair step_general(const StatePair& pair, const NodeNoise& noise,
                       const ComplexMatrix& h_q, const FockOperators& ops, double h,
                       double dt, Integrator integrator = Integrator::Euler);

// Throws DegenerateError when |<Psi-|Psi+>| < 1e-300.
cplx overlap(const StatePair& pair);
std::pair<cplx, cplx> mean_system_ops(const StatePair& pair, const FockOperators& ops);

// Values of b-bar and b-bar^+ at real-time steps 0..k-1 (equal on both
// branches).
struct ShiftHistory {
  std::vector<cplx> b_bar;
  std::vector<cplx> b_bar_plus;
};

// Number of history entries compute_shift needs for `node`: a node at time
// step j reads b-bar values at steps 0..j.
std::size_t shift_history_requirement(const ContourGrid& grid, std::size_t node);

// Discretized contour integrals
//   f(l)  = sum_p G(p, l) c#_p,   f#(l) = sum_p G(l, p) c_p,
//   c_p = -i h s_p dt b-bar(p),   c#_p = -i h s_p dt b-bar^+(p),
// over step nodes (times < t_final) of both branches, evaluated causally: the
// contributions of both branches at times later than node l cancel pairwise.
// Throws SequencingError if the history is too short.
std::pair<cplx, cplx> compute_shift(const ContourGrid& grid, const GreenMatrix& g,
                                    const ShiftHistory& history, std::size_t node,
                                    double coupling);

// O(1)-per-step evaluation of compute_shift for the single-mode bath Green
// function, using exp(-i omega (t - t')) = exp(-i omega dt) * ...
class BathShift {
 public:
  BathShift(double omega, double coupling, double dt);

  // Shifts at the current step, given b-bar, b-bar^+ at the current time.
  NodeNoise shifts(cplx b_bar, cplx b_bar_plus) const;
  // Moves to the next step after the current values were used.
  void advance(cplx b_bar, cplx b_bar_plus);

 private:
  cplx rotate_plus_;   // exp(+i omega dt)
  cplx rotate_minus_;  // exp(-i omega dt)
  double weight_;      // h dt
  cplx sum_plus_{};    // sum_{k<j} exp(+i omega (t_j - t_k)) b-bar^+_k
  cplx sum_minus_{};   // sum_{k<j} exp(-i omega (t_j - t_k)) b-bar_k
};

// Log of the Gaussian density ratio w(alpha + f) / w(alpha) for the bath
// fields restricted to the steps taken so far, with
// w = exp(-alpha^T G^{-1} alpha#). G restricted to those nodes is
// D L D^dag with L unit lower triangular, so G^{-1} is bidiagonal after the
// phase change and the ratio is updated in O(1) per step.
class MeasureRatio {
 public:
  MeasureRatio(double omega, double dt);

  void add_step(std::size_t j, const NodeNoise& base, const NodeNoise& shift);
  cplx log_ratio() const { return base_.value - shifted_.value; }

 private:
  struct Form {
    cplx value{};
    cplx y_forward{}, y_backward{}, u_backward{};
    void extend(std::size_t j, cplx u_f, cplx y_f, cplx u_b, cplx y_b);
  };
  double omega_;
  double dt_;
  Form base_;
  Form shifted_;
};

enum class Observable { Identity, Annihilation, Number };

// Per-trajectory state at one recorded time.
struct NodeRecord {
  double t = 0.0;
  cplx b_bar;         // <Psi-|b|Psi+> / <Psi-|Psi+>
  cplx b_bar_plus;    // <Psi-|b^dag|Psi+> / <Psi-|Psi+>
  cplx number_ratio;  // <Psi-|b^dag b|Psi+> / <Psi-|Psi+>
  cplx log_overlap;   // log <Psi-|Psi+>
  cplx log_weight;    // log_overlap + log measure ratio (== log_overlap unshifted)
  bool finite = true;
};

using TrajectoryRecord = std::vector<NodeRecord>;

// Indices of the recorded real-time steps.
std::vector<std::size_t> output_steps(const OpenSystemConfig& cfg);

// Sweeps one trajectory along the contour with the given base noise.
TrajectoryRecord simulate_trajectory(const OpenSystemConfig& cfg, const NoiseTrajectory& noise);

// Draws the noise for trajectory `index` and simulates it.
TrajectoryRecord simulate_trajectory(const OpenSystemConfig& cfg, const BathFactorization& f,
                                     std::uint64_t index, BathFactorization::Workspace& ws);

// Value of the estimator for one record: normalized gives
// <Psi-|O|Psi+>/<Psi-|Psi+>, otherwise the same ratio times exp(log_weight),
// which is <Psi-|O|Psi+> for unshifted noise.
cplx observable_value(const NodeRecord& r, Observable o, bool normalized);

// Per-node estimates over trajectories; non-finite values are skipped and
// counted. Throws std::invalid_argument for fewer than 2 trajectories.
std::vector<MCEstimate> estimate_observable(std::span<const TrajectoryRecord> trajectories,
                                            Observable o, bool normalized);

struct OpenSystemResult {
  std::vector<double> times;
  std::vector<MCEstimate> re_b;
  std::vector<MCEstimate> im_b;
  std::vector<MCEstimate> norm;          // average of the weight factor
  std::vector<double> overlap_logvar;    // sample variance of log|weight|
  std::vector<double> raw_overlap_logvar;
  std::int64_t n_divergent = 0;          // trajectories with any non-finite node
};

OpenSystemResult run_opensystem(const OpenSystemConfig& cfg);

void write_opensys_csv(std::ostream& out, const OpenSystemConfig& cfg,
                       const OpenSystemResult& result);

}  // namespace qtraj
