#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tabalign {

/// Process exit statuses of the command-line tool.
enum ExitStatus : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitConfig = 2,
  kExitRuntime = 3,
};

/// Parses argv (argv[0] is the program name) and runs one subcommand:
/// solve, bon, itp, sweep-n, sweep-beta, concentration, verify or fixtures.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run_command(int argc, const char* const* argv);

}  // namespace tabalign
