#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slowfast_lv/experiment_config.hpp"

namespace slowfast {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

/// Parses argv and runs the selected subcommand. Normal output goes to the
/// --out file or `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already resolved configuration.
int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

struct VerifyReport {
  std::string check;
  std::vector<std::pair<std::string, double>> params;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Applies the per-check defaults of `verify` to settings that were not
/// given explicitly.
ExperimentConfig resolve_verify_defaults(const ExperimentConfig& cfg);

/// Named checks: prop21, prop22, thm31, prop27, feller, stationarity-exact.
/// Settings not given explicitly take per-check defaults.
VerifyReport run_verify(const ExperimentConfig& cfg);

}  // namespace slowfast
