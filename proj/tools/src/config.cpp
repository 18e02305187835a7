#include "config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace qtraj::cli {

namespace {

using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

struct Bad {
  std::string reason;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment, ignoring '#' inside strings.
std::string_view strip_comment(std::string_view s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_str) {
      ++i;
    } else if (s[i] == '"') {
      in_str = !in_str;
    } else if (s[i] == '#' && !in_str) {
      return s.substr(0, i);
    }
  }
  return s;
}

std::optional<double> parse_number(std::string_view s, bool& is_int, std::int64_t& ival) {
  std::string clean;
  for (char c : s)
    if (c != '_') clean.push_back(c);
  if (clean.empty()) return std::nullopt;
  const char* first = clean.data();
  const char* last = clean.data() + clean.size();
  if (*first == '+') ++first;
  is_int = clean.find_first_of(".eEnN") == std::string::npos;
  if (is_int) {
    auto [p, ec] = std::from_chars(first, last, ival);
    if (ec == std::errc() && p == last) return static_cast<double>(ival);
    if (ec == std::errc::result_out_of_range) throw Bad{"integer out of range"};
    is_int = false;
  }
  double d = 0.0;
  auto [p, ec] = std::from_chars(first, last, d);
  if (ec != std::errc() || p != last) return std::nullopt;
  return d;
}

Value parse_value(std::string_view raw) {
  const std::string_view s = trim(raw);
  if (s.empty()) throw Bad{"missing value"};
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw Bad{"unterminated string"};
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        const char n = s[++i];
        out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
      } else {
        out.push_back(s[i]);
      }
    }
    return out;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw Bad{"unterminated array"};
    std::vector<double> out;
    std::string_view body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const std::string_view item = trim(body.substr(0, comma));
      if (!item.empty()) {
        bool is_int = false;
        std::int64_t iv = 0;
        const auto d = parse_number(item, is_int, iv);
        if (!d) throw Bad{"array elements must be numbers, got '" + std::string(item) + "'"};
        out.push_back(*d);
      } else if (comma != std::string_view::npos) {
        throw Bad{"empty array element"};
      }
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
    return out;
  }
  bool is_int = false;
  std::int64_t iv = 0;
  const auto d = parse_number(s, is_int, iv);
  if (!d) throw Bad{"cannot parse value '" + std::string(s) + "'"};
  if (is_int) return iv;
  return *d;
}

double as_double(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw Bad{"expected a number"};
}

double as_finite(const Value& v) {
  const double d = as_double(v);
  if (!std::isfinite(d)) throw Bad{"must be finite"};
  return d;
}

double as_positive(const Value& v) {
  const double d = as_finite(v);
  if (!(d > 0.0)) throw Bad{"must be > 0"};
  return d;
}

std::int64_t as_int(const Value& v, std::int64_t min) {
  const auto* i = std::get_if<std::int64_t>(&v);
  if (!i) throw Bad{"expected an integer"};
  if (*i < min) throw Bad{"must be >= " + std::to_string(min)};
  return *i;
}

bool as_bool(const Value& v) {
  const auto* b = std::get_if<bool>(&v);
  if (!b) throw Bad{"expected true or false"};
  return *b;
}

const std::string& as_string(const Value& v) {
  const auto* s = std::get_if<std::string>(&v);
  if (!s) throw Bad{"expected a quoted string"};
  return *s;
}

using Setter = std::function<void(RunConfig&, const Value&)>;
using Table = std::map<std::string, Setter, std::less<>>;

Table top_level_keys() {
  return {
      {"experiment",
       [](RunConfig& c, const Value& v) {
         const auto e = parse_experiment(as_string(v));
         if (!e) throw Bad{"unknown experiment '" + as_string(v) + "'"};
         c.experiment = *e;
       }},
      {"master_seed",
       [](RunConfig& c, const Value& v) { c.master_seed = static_cast<std::uint64_t>(as_int(v, 0)); }},
      {"n_workers",
       [](RunConfig& c, const Value& v) { c.n_workers = static_cast<unsigned>(as_int(v, 0)); }},
      {"output", [](RunConfig& c, const Value& v) { c.output = as_string(v); }},
  };
}

Table bell_keys() {
  return {
      {"kappa", [](RunConfig& c, const Value& v) { c.bell.kappa = as_positive(v); }},
      {"kappa_t",
       [](RunConfig& c, const Value& v) {
         if (const auto* a = std::get_if<std::vector<double>>(&v)) {
           c.bell.kappa_t = *a;
         } else {
           c.bell.kappa_t = {as_double(v)};
         }
         for (double x : c.bell.kappa_t)
           if (!std::isfinite(x) || x < 0.0) throw Bad{"values must be finite and >= 0"};
       }},
      {"theta", [](RunConfig& c, const Value& v) { c.bell.angles.theta = as_finite(v); }},
      {"theta_prime", [](RunConfig& c, const Value& v) { c.bell.angles.theta_prime = as_finite(v); }},
      {"phi", [](RunConfig& c, const Value& v) { c.bell.angles.phi = as_finite(v); }},
      {"phi_prime", [](RunConfig& c, const Value& v) { c.bell.angles.phi_prime = as_finite(v); }},
      {"n_samples", [](RunConfig& c, const Value& v) { c.bell.n_samples = as_int(v, 2); }},
      {"sampler",
       [](RunConfig& c, const Value& v) {
         const std::string& s = as_string(v);
         if (s == "contour") {
           c.bell.sampler = BellSampler::Contour;
         } else if (s == "equal_time") {
           c.bell.sampler = BellSampler::EqualTime;
         } else {
           throw Bad{"expected \"contour\" or \"equal_time\""};
         }
       }},
  };
}

Table opensys_keys() {
  return {
      {"epsilon", [](RunConfig& c, const Value& v) { c.opensys.epsilon = as_finite(v); }},
      {"omega", [](RunConfig& c, const Value& v) { c.opensys.omega = as_finite(v); }},
      {"coupling", [](RunConfig& c, const Value& v) { c.opensys.coupling = as_finite(v); }},
      {"t_final", [](RunConfig& c, const Value& v) { c.opensys.t_final = as_positive(v); }},
      {"steps",
       [](RunConfig& c, const Value& v) { c.opensys.steps = static_cast<std::size_t>(as_int(v, 1)); }},
      {"n_samples", [](RunConfig& c, const Value& v) { c.opensys.n_samples = as_int(v, 2); }},
      {"shift", [](RunConfig& c, const Value& v) { c.opensys.shift_enabled = as_bool(v); }},
      {"mode",
       [](RunConfig& c, const Value& v) {
         const std::string& s = as_string(v);
         if (s == "coherent") {
           c.opensys.mode = EvolutionMode::Coherent;
         } else if (s == "fock") {
           c.opensys.mode = EvolutionMode::Fock;
         } else {
           throw Bad{"expected \"coherent\" or \"fock\""};
         }
       }},
      {"n_max",
       [](RunConfig& c, const Value& v) { c.opensys.n_max = static_cast<std::size_t>(as_int(v, 2)); }},
      {"b0_re",
       [](RunConfig& c, const Value& v) {
         c.opensys.initial_amplitude.real(as_finite(v));
       }},
      {"b0_im",
       [](RunConfig& c, const Value& v) {
         c.opensys.initial_amplitude.imag(as_finite(v));
       }},
      {"output_stride",
       [](RunConfig& c, const Value& v) {
         c.opensys.output_stride = static_cast<std::size_t>(as_int(v, 1));
       }},
      {"integrator",
       [](RunConfig& c, const Value& v) {
         const std::string& s = as_string(v);
         if (s == "exponential") {
           c.opensys.integrator = Integrator::Exponential;
         } else if (s == "euler") {
           c.opensys.integrator = Integrator::Euler;
         } else if (s == "auto") {
           c.opensys.integrator = Integrator::Auto;
         } else {
           throw Bad{"expected \"auto\", \"exponential\" or \"euler\""};
         }
       }},
  };
}

Table greens_keys() {
  return {
      {"t_final", [](RunConfig& c, const Value& v) { c.greens.t_final = as_positive(v); }},
      {"steps",
       [](RunConfig& c, const Value& v) { c.greens.steps = static_cast<std::size_t>(as_int(v, 1)); }},
      {"omega", [](RunConfig& c, const Value& v) { c.greens.omega = as_finite(v); }},
  };
}

Table selftest_keys() {
  return {
      {"n_samples", [](RunConfig& c, const Value& v) { c.selftest.n_samples = as_int(v, 100); }},
  };
}

}  // namespace

std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Bell: return "bell";
    case Experiment::OpenSys: return "opensys";
    case Experiment::Greens: return "greens";
    case Experiment::Selftest: return "selftest";
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::Bell, Experiment::OpenSys, Experiment::Greens, Experiment::Selftest})
    if (experiment_name(e) == name) return e;
  return std::nullopt;
}

void RunConfig::finalize() {
  bell.master_seed = master_seed;
  opensys.master_seed = master_seed;
  const unsigned w = n_workers == 0 ? default_worker_count() : n_workers;
  bell.n_workers = w;
  opensys.n_workers = w;
  if (output.empty()) output = std::string(experiment_name(experiment)) + ".csv";
}

RunConfig default_config(Experiment e) {
  RunConfig c;
  c.experiment = e;
  c.bell.kappa_t = {0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.25, 1.5};
  return c;
}

namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& i : issues) {
    os << "\n  ";
    if (i.line > 0) os << "line " << i.line << ": ";
    if (!i.key.empty()) os << "key '" << i.key << "': ";
    os << i.reason;
  }
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

RunConfig parse_config(std::string_view text, std::optional<Experiment> expected) {
  const std::map<std::string, Table, std::less<>> sections = {
      {"", top_level_keys()},       {"bell", bell_keys()},         {"opensys", opensys_keys()},
      {"greens", greens_keys()},    {"selftest", selftest_keys()},
  };

  struct Entry {
    std::string section, key;
    Value value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::vector<ConfigIssue> issues;
  std::set<std::string> seen;
  std::string section;
  std::optional<Experiment> declared;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({line_no, "", "malformed section header"});
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!sections.contains(section)) {
        issues.push_back({line_no, section, "unknown section"});
        section = "\x01";
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back({line_no, std::string(line), "expected key = value"});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    if (section == "\x01") continue;  // already reported
    const std::string qualified = section.empty() ? key : section + "." + key;
    const Table& table = sections.at(section);
    if (!table.contains(key)) {
      issues.push_back({line_no, qualified, "unknown key"});
      continue;
    }
    if (!seen.insert(qualified).second) {
      issues.push_back({line_no, qualified, "duplicate key"});
      continue;
    }
    try {
      entries.push_back({section, key, parse_value(line.substr(eq + 1)), line_no});
    } catch (const Bad& b) {
      issues.push_back({line_no, qualified, b.reason});
    }
  }

  RunConfig cfg = default_config(expected.value_or(Experiment::Selftest));
  for (const Entry& e : entries) {
    const std::string qualified = e.section.empty() ? e.key : e.section + "." + e.key;
    try {
      sections.at(e.section).at(e.key)(cfg, e.value);
      if (e.section.empty() && e.key == "experiment") declared = cfg.experiment;
    } catch (const Bad& b) {
      issues.push_back({e.line, qualified, b.reason});
    }
  }
  if (expected && declared && *declared != *expected)
    issues.push_back({0, "experiment",
                      "config is for '" + std::string(experiment_name(*declared)) +
                          "' but the '" + std::string(experiment_name(*expected)) +
                          "' subcommand was used"});
  if (!expected && !declared) issues.push_back({0, "experiment", "missing required key"});
  if (expected) cfg.experiment = *expected;
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

}  // namespace qtraj::cli
