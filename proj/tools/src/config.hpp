#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qtraj/bell.hpp"
#include "qtraj/opensys.hpp"
#include "qtraj/parallel.hpp"

namespace qtraj::cli {

enum class Experiment { Bell, OpenSys, Greens, Selftest };

std::string_view experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

// Dumps the single-mode bath Green matrix for a small grid.
struct GreensConfig {
  double t_final = 1.0;
  std::size_t steps = 20;
  double omega = 1.0;
};

struct SelftestConfig {
  std::int64_t n_samples = 20000;
};

struct RunConfig {
  Experiment experiment = Experiment::Selftest;
  std::uint64_t master_seed = 1;
  unsigned n_workers = 0;  // 0: QTRAJ_WORKERS or hardware concurrency
  std::string output;      // empty: <experiment>.csv
  BellConfig bell;
  OpenSystemConfig opensys;
  GreensConfig greens;
  SelftestConfig selftest;

  // Copies the shared fields into the experiment blocks.
  void finalize();
};

RunConfig default_config(Experiment e);

struct ConfigIssue {
  std::size_t line = 0;
  std::string key;
  std::string reason;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

// Flat TOML-style text: top-level keys (experiment, master_seed, n_workers,
// output) followed by optional [bell], [opensys], [greens], [selftest]
// sections. Values are numbers, booleans, double-quoted strings or arrays of
// numbers. Comments start with '#'. If `expected` is given and the text has
// an `experiment` key, they must agree. All problems are collected and
// thrown together as one ConfigError.
RunConfig parse_config(std::string_view text, std::optional<Experiment> expected = {});

}  // namespace qtraj::cli
