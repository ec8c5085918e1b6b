#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ct::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a..b" or "a,b,c". Throws std::invalid_argument.
std::vector<long> parse_lag_grid(const std::string& text);
/// "1e-5..1e1" (every decade in between) or "a,b,c". Throws std::invalid_argument.
std::vector<double> parse_kappa_grid(const std::string& text);

}  // namespace ct::cli
