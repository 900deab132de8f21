#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geoaudit::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kInputError = 2;
inline constexpr int kBackendFailure = 3;

inline constexpr const char* kConfigEnv = "GEOAUDIT_CONFIG";

// Runs the command line `args` (args[0] is the program name). Normal output
// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geoaudit::cli
