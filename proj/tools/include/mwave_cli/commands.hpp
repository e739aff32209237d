#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mwave_cli/config.hpp"

namespace mwave::cli {

enum ExitCode : int { kPass = 0, kAssertionFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

/// One asserted threshold of a command.
struct Check {
  std::string name;
  double value = 0;
  std::string relation;  // "<", "<=", ">", ">="
  double threshold = 0;
  bool pass() const;
};

const std::vector<std::string>& command_names();

/// Runs forward | reconstruct | identities | linearize | sweep | svd, writing results
/// and manifest.json into cfg.output_dir(). Prints one line per check to `out`.
/// Errors are mapped to exit codes: ConfigError 2, NumericalError 3.
int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace mwave::cli
