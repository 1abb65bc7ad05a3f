#pragma once

#include <ostream>

namespace decaylab {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Entry point of the `decaylab` tool: simulate | decay-ode | verify | check-a2 | sweep.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace decaylab
