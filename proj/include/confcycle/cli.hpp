#pragma once

namespace confcycle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     // I/O and other runtime failures
inline constexpr int kExitConfig = 2;      // usage, configuration or schema errors
inline constexpr int kExitEngine = 3;      // numerical failure during a run
inline constexpr int kExitInterrupted = 130;

/// Entry point of the `confcycle` tool: subcommands simulate, sweep, leontief
/// and report. Returns the process exit code.
int main(int argc, const char* const* argv);

} // namespace confcycle::cli
