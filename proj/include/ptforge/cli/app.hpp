#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ptforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Runs one subcommand. `args` excludes the program name. Errors are
// reported on `err` as one JSON object per line and mapped to exit codes:
// usage and contract violations 2, data errors 3, numeric failures 4.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* Version();

}  // namespace ptforge::cli
