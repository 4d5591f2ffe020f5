#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hylo::cli {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSolver = 1;
inline constexpr int kExitConfig = 2;

/// Parses `args` (without the program name), runs the subcommand and writes
/// summary.json plus CSV profiles to the output directory.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// Flat key=value configuration file: one entry per line, '#' starts a
/// comment, keys are long flag names ('_' and '-' are interchangeable).
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text);

}  // namespace hylo::cli
