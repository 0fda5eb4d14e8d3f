#pragma once

#include <ostream>

namespace grouptrack {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitInvalid = 2, kExitRuntime = 3 };

/// Entry point of the `grouptrack` tool with subcommands track, recognize,
/// run, evaluate and synth. Results go to `out` unless an output path is
/// given; diagnostics go to `err`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace grouptrack
