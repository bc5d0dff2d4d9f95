#pragma once

#include <string>
#include <vector>

#include "lowrank/bench/config.hpp"
#include "lowrank/bench/results.hpp"

namespace lowrank::bench {

struct RunOptions {
  bool plots = false;
  bool dump_data = false;
  /// Skip writing files; rows are still returned.
  bool dry_run = false;
};

struct RunOutput {
  std::vector<ResultRow> rows;
  /// Paths relative to output_dir, all listed in manifest.json.
  std::vector<std::string> files;
};

/// Computes the rows for a validated config without touching the filesystem.
std::vector<ResultRow> compute_rows(const ExperimentConfig& config);

/// Dispatches the command, writes results.csv, manifest.json and plots.
RunOutput run(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace lowrank::bench
