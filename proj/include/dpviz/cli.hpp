#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dpviz::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalFailure = 3,
};

/// Runs one invocation. args excludes the program name. Machine output goes to
/// files (or `out`); diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpviz::cli
