#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mplace {

/// Exit codes of the `mplace` binary.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,       ///< usage, parse, validation or I/O failure
  kExitInfeasible = 2,  ///< legalization found no assignment
  kExitRolledBack = 3,  ///< legal output, but global placement rolled back to a checkpoint
};

/// Runs one command line (without the program name). Diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mplace
