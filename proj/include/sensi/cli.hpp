#pragma once

#include <iosfwd>

namespace sensi {

/// Exit codes of the command-line tool.
enum ExitCode : int
{
  kExitOk = 0,
  kExitMalformedInput = 2,
  kExitDegenerateData = 3,
  kExitEstimationFailure = 4
};

/// Entry point of the `sensi` tool; argv[0] is the program name.
///
/// Without a subcommand it estimates indices and writes report.json,
/// indices.csv and (with replicates) replicates.csv. The `theory-check`
/// subcommand writes the expansion diagnostics CSV. SENSI_THREADS caps the
/// OpenMP thread count.
int
run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace sensi
