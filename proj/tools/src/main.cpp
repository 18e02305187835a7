#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "run.hpp"

namespace {

using qtraj::cli::Experiment;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::vector<double> kappa_t;
  std::optional<double> epsilon, omega, coupling, t_final;
  std::optional<std::size_t> steps, nmax;
  bool no_shift = false;
  std::optional<std::string> mode;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "Config file (TOML-style)")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--samples", o.samples, "Number of samples / trajectories")
      ->check(CLI::Range(std::int64_t{2}, std::numeric_limits<std::int64_t>::max()));
  sub->add_option("--workers", o.workers, "Worker threads (default: $QTRAJ_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "Output CSV path");
}

qtraj::cli::RunConfig build_config(Experiment e, const Overrides& o) {
  qtraj::cli::RunConfig cfg = qtraj::cli::default_config(e);
  if (!o.config.empty()) {
    std::ifstream in(o.config, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + o.config);
    std::ostringstream text;
    text << in.rdbuf();
    cfg = qtraj::cli::parse_config(text.str(), e);
  }
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.workers) cfg.n_workers = *o.workers;
  if (o.out) cfg.output = *o.out;
  if (o.samples) {
    cfg.bell.n_samples = *o.samples;
    cfg.opensys.n_samples = *o.samples;
    cfg.selftest.n_samples = *o.samples;
  }
  if (!o.kappa_t.empty()) cfg.bell.kappa_t = o.kappa_t;
  if (o.epsilon) cfg.opensys.epsilon = *o.epsilon;
  if (o.omega) {
    cfg.opensys.omega = *o.omega;
    cfg.greens.omega = *o.omega;
  }
  if (o.coupling) cfg.opensys.coupling = *o.coupling;
  if (o.t_final) {
    cfg.opensys.t_final = *o.t_final;
    cfg.greens.t_final = *o.t_final;
  }
  if (o.steps) {
    cfg.opensys.steps = *o.steps;
    cfg.greens.steps = *o.steps;
  }
  if (o.no_shift) cfg.opensys.shift_enabled = false;
  if (o.mode) cfg.opensys.mode = *o.mode == "fock" ? qtraj::EvolutionMode::Fock
                                                   : qtraj::EvolutionMode::Coherent;
  if (o.nmax) cfg.opensys.n_max = *o.nmax;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian quasitrajectory Monte Carlo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QTRAJ_VERSION);

  Overrides o;
  auto* bell = app.add_subcommand("bell", "Intensity moments and S_CH for pair down-conversion");
  auto* opensys = app.add_subcommand("opensys", "Open-system unraveling with bath noise");
  auto* greens = app.add_subcommand("greens", "Dump the bath contour Green matrix");
  auto* selftest = app.add_subcommand("selftest", "Factorization, sampler and oracle checks");
  for (auto* s : {bell, opensys, greens, selftest}) add_common(s, o);

  bell->add_option("--kappa-t", o.kappa_t, "kappa*t evaluation points")->delimiter(',');
  opensys->add_option("--epsilon", o.epsilon, "System frequency");
  for (auto* s : {opensys, greens}) {
    s->add_option("--omega", o.omega, "Bath frequency");
    s->add_option("--t-final", o.t_final, "Final time")->check(CLI::PositiveNumber);
    s->add_option("--steps", o.steps, "Time steps")->check(CLI::PositiveNumber);
  }
  opensys->add_option("--coupling", o.coupling, "System-bath coupling h");
  opensys->add_flag("--no-shift", o.no_shift, "Disable the noise shift");
  opensys->add_option("--mode", o.mode, "State representation")
      ->check(CLI::IsMember({"coherent", "fock"}));
  opensys->add_option("--nmax", o.nmax, "Fock truncation (fock mode)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{400}));

  CLI11_PARSE(app, argc, argv);

  Experiment e = Experiment::Selftest;
  if (bell->parsed()) e = Experiment::Bell;
  if (opensys->parsed()) e = Experiment::OpenSys;
  if (greens->parsed()) e = Experiment::Greens;

  try {
    return qtraj::cli::run(build_config(e, o), std::cerr);
  } catch (const std::exception& ex) {
    std::cerr << "qtraj: " << ex.what() << '\n';
    return 2;
  }
}
