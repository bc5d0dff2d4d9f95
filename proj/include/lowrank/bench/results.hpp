#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lowrank::bench {

/// One (configuration, statistic) measurement.
struct ResultRow {
  std::string experiment_id;
  std::string command;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::string norm_tag;
  std::optional<double> rho;
  std::string statistic_name;
  double value = 0.0;
  /// Present for every Monte Carlo value; empty for closed-form quantities.
  std::optional<double> std_error;
  std::size_t reps = 0;
  std::uint64_t master_seed = 0;
  std::string version;
};

std::string version_string();

/// Reals with 17 significant digits, '.' separator.
std::string format_real(double value);

inline constexpr const char* kCsvHeader =
    "experiment_id,command,n,d,k,norm_tag,rho,statistic_name,value,std_error,reps,master_seed,"
    "version";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& in);

}  // namespace lowrank::bench
