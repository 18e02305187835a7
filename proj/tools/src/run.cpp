#include "run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "qtraj/factorization.hpp"
#include "qtraj/green.hpp"
#include "qtraj/sampling.hpp"
#include "qtraj/wick.hpp"

#ifndef QTRAJ_VERSION
#define QTRAJ_VERSION "unknown"
#endif

namespace qtraj::cli {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename to " + target.string() + ": " + ec.message());
  }
}

namespace {

void metadata(std::ostream& out, const RunConfig& cfg) {
  out << "# qtraj version=" << QTRAJ_VERSION << '\n'
      << "# seed=" << cfg.master_seed << '\n';
}

void greens_csv(std::ostream& out, const RunConfig& cfg, std::ostream& log) {
  const ContourGrid grid(cfg.greens.t_final, cfg.greens.steps);
  const GreenMatrix g = bath_green_single_mode(grid, cfg.greens.omega);
  const BathFactorization bath(grid, cfg.greens.omega);
  const double resid = frobenius_residual(bath.dense(), g.entries);
  log << "greens: nodes=" << grid.size() << " factorization residual=" << resid << '\n';
  out << std::setprecision(17) << "# experiment=greens\n"
      << "# t_final=" << cfg.greens.t_final << " steps=" << cfg.greens.steps
      << " omega=" << cfg.greens.omega << '\n'
      << "# factorization_residual=" << resid << '\n'
      << "row,col,re,im\n";
  for (Eigen::Index l = 0; l < g.entries.rows(); ++l)
    for (Eigen::Index p = 0; p < g.entries.cols(); ++p)
      out << l << ',' << p << ',' << g.entries(l, p).real() << ',' << g.entries(l, p).imag() << '\n';
}

struct Check {
  std::string name;
  double value;
  double limit;
  bool passed() const { return std::isfinite(value) && value <= limit; }
};

// Largest |empirical - exact| / standard error over the entries of
// E[Phi Phi^T] for draws from the Takagi factor.
double covariance_zmax(const ComplexMatrix& c, std::int64_t n, std::uint64_t seed) {
  const SymmetricFactorization f = factorize_takagi(c);
  const Eigen::Index d = c.rows();
  std::vector<Accumulator> acc(static_cast<std::size_t>(d * d));
  for (std::int64_t i = 0; i < n; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i), 7);
    const QuasiTrajectory q = sample_doubled(f, rng);
    ComplexVector phi(d);
    phi << q.alpha, q.alpha_sharp;
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) acc[static_cast<std::size_t>(a * d + b)].add(phi(a) * phi(b));
  }
  double zmax = 0.0;
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      const MCEstimate e = acc[static_cast<std::size_t>(a * d + b)].estimate();
      const double err = std::abs(e.mean - c(a, b));
      zmax = std::max(zmax, e.std_of_mean > 0 ? err / e.std_of_mean : (err < 1e-12 ? 0.0 : INFINITY));
    }
  return zmax;
}

std::vector<Check> selftest_checks(const RunConfig& cfg) {
  std::vector<Check> checks;
  {
    const ContourGrid grid(1.0, 20);
    const GreenMatrix g = bath_green_single_mode(grid, 1.0);
    const double scale = std::max(1.0, g.entries.norm());
    checks.push_back({"bath_svd_residual", frobenius_residual(factorize_svd(g), g.entries) / scale, 1e-10});
    const BathFactorization bath(grid, 1.0);
    checks.push_back({"bath_structured_residual",
                      frobenius_residual(bath.dense(), g.entries) / scale, 1e-10});
  }
  {
    const DoubledCovariance c = pdc_doubled_covariance(1.0, 0.5);
    checks.push_back({"pdc_takagi_residual",
                      frobenius_residual(factorize_takagi(c), c.entries) /
                          std::max(1.0, c.entries.norm()),
                      1e-10});
    checks.push_back({"pdc_sampler_covariance_z",
                      covariance_zmax(c.entries, cfg.selftest.n_samples, cfg.master_seed), 5.0});
  }
  {
    BellConfig b = cfg.bell;
    b.n_samples = cfg.selftest.n_samples;
    const IntensityMoments m = intensity_moments_mc(b, 0.5);
    const IntensityValues o = intensity_moments_oracle(0.5, b.angles);
    double zmax = 0.0;
    const std::pair<const MCEstimate*, cplx> pairs[] = {
        {&m.i_a, o.i_a},         {&m.i_b, o.i_b},           {&m.i_ab_tp, o.i_ab_tp},
        {&m.i_ab_tpp, o.i_ab_tpp}, {&m.i_ab_tptp, o.i_ab_tptp}, {&m.i_ab_tptpp, o.i_ab_tptpp}};
    for (const auto& [e, exact] : pairs)
      zmax = std::max(zmax, std::abs(e->mean - exact) / e->std_of_mean);
    checks.push_back({"bell_wick_oracle_z", zmax, 5.0});
  }
  {
    OpenSystemConfig o;
    o.t_final = 0.5;
    o.steps = 500;
    o.n_samples = 2;
    o.n_max = 40;
    o.output_stride = 100;
    o.integrator = Integrator::Exponential;
    const ContourGrid grid(o.t_final, o.steps);
    const BathFactorization bath(grid, o.omega);
    auto ws = bath.make_workspace();
    RngStream rng(cfg.master_seed, 0, 9);
    const NoiseTrajectory noise = generate_base_noise(bath, rng, ws);
    const TrajectoryRecord coherent = simulate_trajectory(o, noise);
    o.mode = EvolutionMode::Fock;
    const TrajectoryRecord fock = simulate_trajectory(o, noise);
    double diff = 0.0;
    for (std::size_t k = 0; k < coherent.size(); ++k)
      diff = std::max(diff, std::abs(coherent[k].b_bar - fock[k].b_bar));
    checks.push_back({"coherent_vs_fock", diff, 1e-6});
  }
  return checks;
}

}  // namespace

bool run_to_csv(const RunConfig& cfg_in, std::string& csv, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.finalize();
  std::ostringstream out;
  metadata(out, cfg);
  bool ok = true;
  switch (cfg.experiment) {
    case Experiment::Bell: {
      const auto rows = bell_sweep(cfg.bell);
      write_bell_csv(out, cfg.bell, rows);
      for (const auto& r : rows)
        log << "bell: kappa_t=" << r.kappa_t << " S_CH=" << r.s_ch.value.mean.real() << " +- "
            << r.s_ch.value.std_of_mean << " (oracle " << r.s_ch_oracle << ")"
            << (r.s_ch.degenerate ? " [degenerate denominator]" : "") << '\n';
      break;
    }
    case Experiment::OpenSys: {
      const OpenSystemResult res = run_opensystem(cfg.opensys);
      write_opensys_csv(out, cfg.opensys, res);
      log << "opensys: " << res.times.size() << " output nodes, " << res.n_divergent
          << " divergent trajectories\n";
      break;
    }
    case Experiment::Greens:
      greens_csv(out, cfg, log);
      break;
    case Experiment::Selftest: {
      out << "# experiment=selftest\ncheck,passed,value,limit\n" << std::setprecision(17);
      for (const Check& c : selftest_checks(cfg)) {
        ok = ok && c.passed();
        log << (c.passed() ? "PASS " : "FAIL ") << c.name << " value=" << c.value
            << " limit=" << c.limit << '\n';
        out << c.name << ',' << (c.passed() ? 1 : 0) << ',' << c.value << ',' << c.limit << '\n';
      }
      break;
    }
  }
  csv = out.str();
  return ok;
}

int run(const RunConfig& cfg, std::ostream& log) {
  std::string csv;
  const bool ok = run_to_csv(cfg, csv, log);
  RunConfig fin = cfg;
  fin.finalize();
  write_atomic(fin.output, csv);
  log << "wrote " << fin.output << '\n';
  return ok ? 0 : 1;
}

}  // namespace qtraj::cli
