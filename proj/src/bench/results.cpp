#include "lowrank/bench/results.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "lowrank/common.hpp"

#ifndef LOWRANK_VERSION
#define LOWRANK_VERSION "0.0.0"
#endif

namespace lowrank::bench {

std::string version_string() { return "lowrank-detect-" LOWRANK_VERSION; }

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.experiment_id << ',' << r.command << ',' << r.n << ',' << r.d << ',' << r.k << ','
        << r.norm_tag << ',' << (r.rho ? format_real(*r.rho) : "") << ',' << r.statistic_name
        << ',' << format_real(r.value) << ',' << (r.std_error ? format_real(*r.std_error) : "")
        << ',' << r.reps << ',' << r.master_seed << ',' << r.version << '\n';
  }
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw InvalidArgument("results CSV has an unexpected header");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 13) {
      throw InvalidArgument("results CSV line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected 13");
    }
    try {
      ResultRow r;
      r.experiment_id = cells[0];
      r.command = cells[1];
      r.n = std::stoull(cells[2]);
      r.d = std::stoull(cells[3]);
      r.k = std::stoull(cells[4]);
      r.norm_tag = cells[5];
      if (!cells[6].empty()) r.rho = std::stod(cells[6]);
      r.statistic_name = cells[7];
      r.value = std::stod(cells[8]);
      if (!cells[9].empty()) r.std_error = std::stod(cells[9]);
      r.reps = std::stoull(cells[10]);
      r.master_seed = std::stoull(cells[11]);
      r.version = cells[12];
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidArgument("results CSV line " + std::to_string(line_no) + " is malformed");
    }
  }
  return rows;
}

}  // namespace lowrank::bench
