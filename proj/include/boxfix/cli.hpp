#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace boxfix {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Runs the command line `args` (args[0] is the program name). Reports go to
/// files named on the command line, short summaries to `out`, diagnostics
/// ("boxfix: error[<code>]: <message>") to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace boxfix
