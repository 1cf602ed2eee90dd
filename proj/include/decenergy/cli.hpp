#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace decenergy {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name. Human-readable
// summaries go to `out`, diagnostics to `err`; artifacts are written to the
// paths named on the command line.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace decenergy
