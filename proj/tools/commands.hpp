#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coexist::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidConfig = 2,
  kDualPathMismatch = 3,
  kInfeasible = 4,
};

/// Runs the tool on `args` (program name excluded).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coexist::cli
