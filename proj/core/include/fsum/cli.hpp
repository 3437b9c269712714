#pragma once

namespace fsum {

// Full command-line entry point (the `fsum` binary's main is a thin wrapper).
// Subcommands: foveate, build, score, baseline, analyze, render, run.
// Returns the process exit code: 0 success, 2 configuration/usage error,
// 3 backend error, 4 data error.
int run_cli(int argc, const char* const* argv);

}  // namespace fsum
