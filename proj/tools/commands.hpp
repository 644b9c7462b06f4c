#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace paleo::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kInputError = 2, kNumericalError = 3 };

/// Parses `args` (without the program name) and runs the selected subcommand.
/// Diagnostics go to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paleo::cli
