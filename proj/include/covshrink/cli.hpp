#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covshrink {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

/// Runs the covshrink command line. argv[0] is the program name.
/// Returns 0 on success, 1 on usage errors, 2 on numeric or model errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with `args` excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covshrink
