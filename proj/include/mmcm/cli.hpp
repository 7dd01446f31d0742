#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmcm {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Runs the tool on `args` (program name excluded), writing normal output
/// to `out` and diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mmcm
