#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"

namespace qtraj::cli {

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

// Produces the experiment's CSV text (metadata lines, header, rows).
// Progress and check results go to `log`. Returns false if a selftest check
// failed; the CSV is produced either way.
bool run_to_csv(const RunConfig& cfg, std::string& csv, std::ostream& log);

// run_to_csv followed by write_atomic; returns the process exit code.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace qtraj::cli
