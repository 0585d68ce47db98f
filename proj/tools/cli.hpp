#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tailsim::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNonConvergence = 3, kEnvironment = 4 };

// Runs one command line (args[0] is the program name) and returns the exit
// code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tailsim::cli
