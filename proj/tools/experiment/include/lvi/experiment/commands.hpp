#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lvi/experiment/config.hpp"

namespace lvi::experiment {

/// Generates and saves one bank per configured alpha; prints a summary line per bank.
void cmd_bank(const ExperimentConfig& cfg, std::ostream& log);

/// Writes table<id>.csv and table<id>_se.csv into the output directory.
void cmd_table(const ExperimentConfig& cfg, int table_id, std::ostream& log);

/// Writes figure<id>.csv: one block of rows per (alpha, sigma, shift) series.
void cmd_figure(const ExperimentConfig& cfg, int figure_id, std::ostream& log);

/// Writes sweep.csv (deterministic) and sweep_timing.csv (wall times) against one bank.
void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);

/// Sampler and covariance checks; returns false when any check is flagged.
bool cmd_validate(const ExperimentConfig& cfg, std::ostream& log);

/// Loads the bank for alpha when its file exists, otherwise generates it (and saves it
/// when cfg.save_bank).
SimulationBank obtain_bank(const ExperimentConfig& cfg, double alpha, std::ostream& log);

enum ExitCode : int {
  kExitOk = 0,
  kExitFlagged = 1,  ///< validate found a check outside its band
  kExitConfig = 2,   ///< configuration, domain or command-line error
  kExitIo = 3,
  kExitNumerical = 4,  ///< NaN detected in an estimator
};

/// Runs a command body and maps its outcome to an exit code; errors are reported on err.
int run_guarded(const std::function<bool()>& body, std::ostream& err);

}  // namespace lvi::experiment
