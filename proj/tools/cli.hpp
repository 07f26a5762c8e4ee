#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snic::cli {

enum ExitCode { ok = 0, usage = 1, numerical = 2 };

/// `key = value` lines with `#` comments. Keys name long options of the selected subcommand;
/// underscores and dashes are interchangeable. Boolean keys become bare flags when true.
std::vector<std::string> config_tokens(const std::string& path);

/// Runs the snic command line. Results go to `out` (or the files named by --out and friends),
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace snic::cli
