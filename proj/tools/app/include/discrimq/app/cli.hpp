#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace discrimq::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Parses `args` (program name first), runs one stage and prints its JSON
/// status line to `out`. Returns 0 on success, 1 for usage and validation
/// errors, 2 for runtime failures.
int run_command(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

}  // namespace discrimq::app
