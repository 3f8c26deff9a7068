#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lowfreq::cli {

// Exit codes: 0 success, 1 input/runtime error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (without the program name). Diagnostics go to `err`,
// results not written to a file go to `out`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lowfreq::cli
