#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lplsh {

inline constexpr int kExitOk = 0;
/// Precondition violations, usage errors and failed verify suites.
inline constexpr int kExitContract = 1;
/// Unreadable, malformed or unwritable files.
inline constexpr int kExitIo = 2;

/// Runs one subcommand; args excludes the program name. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lplsh
