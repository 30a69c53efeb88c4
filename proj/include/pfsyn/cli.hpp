#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pfsyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNegative = 2;

/// Runs one invocation: analyze | synthesize | verify | simulate | sweep.
/// Exit codes: 0 success/feasible/pass, 2 infeasible/fail, 1 usage or I/O
/// error (nothing is written to `out` in that case).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfsyn::cli
