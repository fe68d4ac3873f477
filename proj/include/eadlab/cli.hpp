#pragma once

// Command-line front end. Exit codes: 0 success, 1 validation or
// configuration failure, 2 runtime abort, 64 usage error.

#include <ostream>
#include <string>
#include <vector>

namespace eadlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitAbort = 2;
inline constexpr int kExitUsage = 64;

/// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eadlab
