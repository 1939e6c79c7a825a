#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rfd {

// Exit codes of the rfd command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;         // bad flags, files, parameters
inline constexpr int kExitNoResult = 2;      // NotConverged / NotFound
inline constexpr int kExitUnreachable = 3;
inline constexpr int kExitInvariant = 4;     // simulator or telemetry invariant breach

/// Runs one rfd command. `args` excludes the program name, e.g.
/// {"route", "--graph", "g.json", "--origin", "S", "--dest", "D", "--algo", "rfd"}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rfd
