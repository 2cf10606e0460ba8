#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace impgraph::cli {

/// Exit codes of the impgraph tool.
enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataMismatch = 2,
  kNumericalFailure = 3,
};

/// Runs one CLI invocation (args exclude the program name) and returns its
/// exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace impgraph::cli
