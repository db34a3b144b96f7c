#pragma once

// Run, sweep and manufactured-solution drivers behind the `sim` executable.
// Each returns a process exit code and writes its files under
// config.output_dir.

#include "cfphase/config.hpp"
#include "cfphase/convergence.hpp"

#include <filesystem>
#include <iosfwd>

namespace cfphase {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,     ///< bad command line or configuration
    kExitSolver = 2,    ///< non-finite state or step limit
    kExitInvariant = 3, ///< e.g. maximum-principle breach
    kExitIo = 4,
    kExitPartial = 5    ///< some sweep entries failed
};

/// Column headers, fixed strings.
const std::vector<std::string>& snapshot_columns();
const std::vector<std::string>& sweep_columns(int family_size);

/// Writes snapshots.csv, monitors.csv and meta.json for one finished run.
/// Throws std::ios_base::failure on I/O errors.
void write_run_outputs(const std::filesystem::path& dir, const RunConfig& config,
                       const RunResult& result, const std::string& status);

int run_command(const RunConfig& config, std::ostream& log);
int sweep_command(const RunConfig& config, const std::vector<double>& kappas, std::ostream& log);
int mms_command(const RunConfig& config, std::ostream& log);

} // namespace cfphase
