#pragma once

// Command-line front end. Subcommands: solve, eval, bisim, convert,
// game-solve, bench frozen-lake, validate. Exit codes: 0 on success, 1 when
// a solver fails on legitimate input, 2 on input or usage errors. With
// --json, results go to stdout as JSON and errors to stderr as
//     {"error": {"category": ..., "type": ..., "message": ...}}

#include <iosfwd>
#include <string>
#include <vector>

namespace rmdp {

/// Runs one command. `args` holds the arguments without the program name.
/// Normal output goes to `out`, diagnostics and errors to `err`; nothing is
/// printed to the process streams, so callers can capture everything.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rmdp
