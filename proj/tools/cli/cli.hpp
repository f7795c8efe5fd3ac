#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace mellin_deconv::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kBadInput = 2,
  kAssumptionViolated = 3,
};

/// Runs the command line `args` (without the program name).
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace mellin_deconv::cli
