#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lowrank/common.hpp"

namespace lowrank::bench {

/// Invalid experiment configuration; names the offending field.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument("config field '" + field + "': " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Command { calibrate, power, phase, lecam, confset, theorem4_demo, report };

std::string_view to_string(Command command);
Command parse_command(std::string_view text);

struct ExperimentConfig {
  Command command = Command::power;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 1;
  std::optional<std::size_t> k0;
  std::optional<std::size_t> k1;
  NormTag norm_tag = NormTag::frobenius;
  double alpha = 0.05;
  /// Absolute separations; when empty, rho_multipliers scale the detection rate.
  std::vector<double> rho_grid;
  std::vector<double> rho_multipliers;
  /// phase: sample sizes to sweep (default d^2/2, d^2, 2d^2, 4d^2).
  std::vector<std::size_t> n_grid;
  /// confset: ranks of the true signal; theorem4-demo: values of k1.
  std::vector<std::size_t> k_grid;
  std::size_t reps = 500;
  std::size_t calibration_reps = 2000;
  /// "monte_carlo" or "analytic".
  std::string calibration = "monte_carlo";
  /// lecam: replications of the detect cross-check.
  std::size_t detect_reps = 2000;
  /// confset: Frobenius norm of the generated signals.
  double signal_norm = 1.0;
  double penalty_scale = 1.5;
  std::uint64_t master_seed = 1;
  /// 0 means "auto".
  std::size_t threads = 0;
  std::string output_dir = "results";
  /// report: CSV to read (defaults to <output_dir>/results.csv).
  std::string input_csv;
};

/// Parses a config document; unknown fields are rejected.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Checks ranges and module guards; throws ConfigError naming the field.
void validate(const ExperimentConfig& config);

}  // namespace lowrank::bench
