#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "config.hpp"
#include "run.hpp"

using namespace qtraj;
using namespace qtraj::cli;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<ConfigIssue> issues_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

}  // namespace

TEST(Config, MinimalBellUsesDefaults) {
  const RunConfig c = parse_config("experiment = \"bell\"\n[bell]\nkappa_t = [0.5]\n");
  EXPECT_EQ(c.experiment, Experiment::Bell);
  EXPECT_EQ(c.bell.kappa_t, std::vector<double>{0.5});
  EXPECT_EQ(c.bell.n_samples, 100000);
  EXPECT_DOUBLE_EQ(c.bell.kappa, 1.0);
  EXPECT_DOUBLE_EQ(c.bell.angles.theta, 0.0);
  EXPECT_DOUBLE_EQ(c.bell.angles.theta_prime, 45.0);
  EXPECT_DOUBLE_EQ(c.bell.angles.phi, 22.5);
  EXPECT_DOUBLE_EQ(c.bell.angles.phi_prime, 67.5);
  EXPECT_EQ(c.master_seed, 1u);
}

TEST(Config, UnknownKeyIsNamed) {
  const auto issues = issues_of("experiment = \"bell\"\n[bell]\nkapa = 1.0\n");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].key, "bell.kapa");
  EXPECT_EQ(issues[0].line, 3u);
  try {
    parse_config("[bell]\nkapa = 1.0\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("kapa"), std::string::npos);
  }
}

TEST(Config, MissingExperimentReported) {
  const auto issues = issues_of("[bell]\nkappa = 1\n");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].key, "experiment");
}

TEST(Config, TypeMismatchAndDuplicates) {
  EXPECT_FALSE(issues_of("[opensys]\nsteps = \"many\"\n").empty());
  EXPECT_FALSE(issues_of("[opensys]\nshift = 3\n").empty());
  EXPECT_FALSE(issues_of("[opensys]\nsteps = 10\nsteps = 20\n").empty());
  EXPECT_FALSE(issues_of("[nosuch]\nx = 1\n").empty());
  EXPECT_FALSE(issues_of("[bell]\nkappa = -1\n").empty());
}

TEST(Config, AllIssuesReportedTogether) {
  const auto issues = issues_of("experiment = \"bell\"\n[bell]\nkapa = 1\nsampler = \"x\"\n[opensys]\nsteps = true\n");
  EXPECT_EQ(issues.size(), 3u);
}

TEST(Config, ExperimentMismatch) {
  EXPECT_THROW(parse_config("experiment = \"bell\"\n", Experiment::OpenSys), ConfigError);
  EXPECT_EQ(parse_config("", Experiment::OpenSys).experiment, Experiment::OpenSys);
}

TEST(Config, OpenSysKeys) {
  const RunConfig c = parse_config(
      "experiment = \"opensys\"\nmaster_seed = 7\n[opensys]\nsteps = 100\nt_final = 2.5\n"
      "shift = false\nmode = \"fock\"\nn_max = 12\nintegrator = \"exponential\"\n");
  EXPECT_EQ(c.opensys.steps, 100u);
  EXPECT_DOUBLE_EQ(c.opensys.t_final, 2.5);
  EXPECT_FALSE(c.opensys.shift_enabled);
  EXPECT_EQ(c.opensys.mode, EvolutionMode::Fock);
  EXPECT_EQ(c.opensys.n_max, 12u);
  EXPECT_EQ(c.opensys.integrator, Integrator::Exponential);
  EXPECT_EQ(c.master_seed, 7u);
}

TEST(Run, BellBytesIndependentOfWorkers) {
  RunConfig c = default_config(Experiment::Bell);
  c.bell.kappa_t = {0.3, 0.9};
  c.bell.n_samples = 3000;
  std::ostringstream log;
  std::string a, b;
  c.n_workers = 1;
  c.finalize();
  run_to_csv(c, a, log);
  c.n_workers = 8;
  c.finalize();
  run_to_csv(c, b, log);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("s_ch"), std::string::npos);
}

TEST(Run, OpenSysBytesIndependentOfWorkers) {
  RunConfig c = default_config(Experiment::OpenSys);
  c.opensys.t_final = 1.0;
  c.opensys.steps = 100;
  c.opensys.n_samples = 200;
  c.opensys.output_stride = 10;
  std::ostringstream log;
  std::string a, b;
  c.n_workers = 1;
  c.finalize();
  run_to_csv(c, a, log);
  c.n_workers = 8;
  c.finalize();
  run_to_csv(c, b, log);
  EXPECT_EQ(a, b);
}

TEST(Run, AtomicWriteReplacesFile) {
  const auto dir = std::filesystem::temp_directory_path() / "qtraj_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.csv";
  write_atomic(path.string(), "first\n");
  write_atomic(path.string(), "second\n");
  EXPECT_EQ(read_file(path), "second\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
  std::filesystem::remove_all(dir);
}

TEST(Run, GreensDump) {
  RunConfig c = default_config(Experiment::Greens);
  c.greens.steps = 2;
  c.finalize();
  std::ostringstream log;
  std::string csv;
  EXPECT_TRUE(run_to_csv(c, csv, log));
  std::size_t rows = 0;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') ++rows;
  EXPECT_EQ(rows, 1u + 6u * 6u);
}
