#pragma once

#include <iosfwd>

namespace blindspot {

// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
// failure.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

// Entry point of the `blindspot` command line tool. Subcommands: synth,
// featurize, train, eval, explain, mine, pipeline.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blindspot
