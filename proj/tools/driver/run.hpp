#pragma once

#include <filesystem>
#include <vector>

#include "driver/config.hpp"
#include "driver/runner.hpp"

namespace trapkit::driver {

struct RunResult {
  ExperimentOutput output;
  std::vector<StageLog> stages;
  bool all_pass = false;
};

/// Runs the configured experiment into `out_dir`: one <stage>.jsonl per
/// stage, then verdicts.json, summary.csv and manifest.json. With `resume`,
/// finished and partial stages written under the same config are picked up.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir, unsigned threads,
                         bool resume);

/// Process exit codes of the CLI.
enum ExitCode : int { kPass = 0, kFailure = 1, kConfigError = 2, kVerdictFailed = 3, kInterrupted = 130 };

}  // namespace trapkit::driver
