#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace overlap_lab::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kUsageError = 2 };

// Runs one subcommand; data goes to files or `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace overlap_lab::cli
