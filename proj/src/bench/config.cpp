#include "lowrank/bench/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "lowrank/priors.hpp"
#include "lowrank/trace_model.hpp"

namespace lowrank::bench {

namespace {

using nlohmann::json;

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields{
      "command",     "n",           "d",          "k",           "k0",
      "k1",          "norm_tag",    "alpha",      "rho_grid",    "rho_multipliers",
      "n_grid",      "k_grid",      "reps",       "calibration_reps", "calibration",
      "detect_reps", "signal_norm", "penalty_scale", "master_seed", "threads",
      "output_dir",  "input_csv"};
  return fields;
}

std::size_t get_count(const json& doc, const std::string& field) {
  const json& v = doc.at(field);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(field, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

double get_real(const json& doc, const std::string& field) {
  const json& v = doc.at(field);
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::string get_string(const json& doc, const std::string& field) {
  const json& v = doc.at(field);
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

template <class T, class Get>
std::vector<T> get_list(const json& doc, const std::string& field, Get get) {
  const json& v = doc.at(field);
  if (!v.is_array()) throw ConfigError(field, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    json wrapper{{field, v[i]}};
    out.push_back(get(wrapper, field));
  }
  return out;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::calibrate: return "calibrate";
    case Command::power: return "power";
    case Command::phase: return "phase";
    case Command::lecam: return "lecam";
    case Command::confset: return "confset";
    case Command::theorem4_demo: return "theorem4-demo";
    case Command::report: return "report";
  }
  return "unknown";
}

Command parse_command(std::string_view text) {
  for (Command c : {Command::calibrate, Command::power, Command::phase, Command::lecam,
                    Command::confset, Command::theorem4_demo, Command::report}) {
    if (to_string(c) == text) return c;
  }
  throw ConfigError("command", "unknown command '" + std::string(text) + "'");
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (known_fields().count(item.key()) == 0) throw ConfigError(item.key(), "unknown field");
  }
  ExperimentConfig c;
  auto has = [&](const char* f) { return doc.contains(f); };
  if (has("command")) c.command = parse_command(get_string(doc, "command"));
  if (has("n")) c.n = get_count(doc, "n");
  if (has("d")) c.d = get_count(doc, "d");
  if (has("k")) c.k = get_count(doc, "k");
  if (has("k0")) c.k0 = get_count(doc, "k0");
  if (has("k1")) c.k1 = get_count(doc, "k1");
  if (has("norm_tag")) {
    try {
      c.norm_tag = parse_norm_tag(get_string(doc, "norm_tag"));
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError("norm_tag", e.what());
    }
  }
  if (has("alpha")) c.alpha = get_real(doc, "alpha");
  if (has("rho_grid")) c.rho_grid = get_list<double>(doc, "rho_grid", get_real);
  if (has("rho_multipliers")) c.rho_multipliers = get_list<double>(doc, "rho_multipliers", get_real);
  if (has("n_grid")) c.n_grid = get_list<std::size_t>(doc, "n_grid", get_count);
  if (has("k_grid")) c.k_grid = get_list<std::size_t>(doc, "k_grid", get_count);
  if (has("reps")) c.reps = get_count(doc, "reps");
  if (has("calibration_reps")) c.calibration_reps = get_count(doc, "calibration_reps");
  if (has("calibration")) c.calibration = get_string(doc, "calibration");
  if (has("detect_reps")) c.detect_reps = get_count(doc, "detect_reps");
  if (has("signal_norm")) c.signal_norm = get_real(doc, "signal_norm");
  if (has("penalty_scale")) c.penalty_scale = get_real(doc, "penalty_scale");
  if (has("master_seed")) {
    const json& v = doc.at("master_seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError("master_seed", "expected a non-negative 64-bit integer");
    }
    c.master_seed = v.get<std::uint64_t>();
  }
  if (has("threads")) {
    const json& v = doc.at("threads");
    if (v.is_string() && v.get<std::string>() == "auto") {
      c.threads = 0;
    } else if (v.is_number_integer() && v.get<long long>() > 0) {
      c.threads = v.get<std::size_t>();
    } else {
      throw ConfigError("threads", "expected a positive integer or \"auto\"");
    }
  }
  if (has("output_dir")) c.output_dir = get_string(doc, "output_dir");
  if (has("input_csv")) c.input_csv = get_string(doc, "input_csv");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json doc{{"command", std::string(to_string(c.command))},
           {"n", c.n},
           {"d", c.d},
           {"k", c.k},
           {"norm_tag", std::string(to_string(c.norm_tag))},
           {"alpha", c.alpha},
           {"rho_grid", c.rho_grid},
           {"rho_multipliers", c.rho_multipliers},
           {"n_grid", c.n_grid},
           {"k_grid", c.k_grid},
           {"reps", c.reps},
           {"calibration_reps", c.calibration_reps},
           {"calibration", c.calibration},
           {"detect_reps", c.detect_reps},
           {"signal_norm", c.signal_norm},
           {"penalty_scale", c.penalty_scale},
           {"master_seed", c.master_seed},
           {"output_dir", c.output_dir},
           {"input_csv", c.input_csv}};
  doc["threads"] = c.threads == 0 ? json("auto") : json(c.threads);
  if (c.k0) doc["k0"] = *c.k0;
  if (c.k1) doc["k1"] = *c.k1;
  return doc;
}

void validate(const ExperimentConfig& c) {
  auto positive = [](const char* field, std::size_t v) {
    if (v == 0) throw ConfigError(field, "must be positive");
  };
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  for (double r : c.rho_grid) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("rho_grid", "values must be non-negative");
  }
  for (double r : c.rho_multipliers) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ConfigError("rho_multipliers", "values must be non-negative");
    }
  }
  if (c.calibration != "monte_carlo" && c.calibration != "analytic") {
    throw ConfigError("calibration", "must be \"monte_carlo\" or \"analytic\"");
  }
  if (c.calibration == "monte_carlo" && c.calibration_reps < 100) {
    throw ConfigError("calibration_reps", "Monte Carlo calibration needs at least 100");
  }
  if (!(c.signal_norm > 0.0)) throw ConfigError("signal_norm", "must be positive");
  if (!(c.penalty_scale >= 0.0)) throw ConfigError("penalty_scale", "must be non-negative");
  if (c.command == Command::report) return;

  positive("n", c.n);
  positive("d", c.d);
  positive("reps", c.reps);
  if (c.k == 0 || c.k > c.d) throw ConfigError("k", "must satisfy 1 <= k <= d");
  try {
    check_design_budget(c.n, c.d);
    for (std::size_t n : c.n_grid) check_design_budget(n, c.d);
  } catch (const GuardViolation&) {
    throw;
  }
  for (std::size_t n : c.n_grid) {
    if (n < 2) throw ConfigError("n_grid", "sample sizes must be at least 2");
  }
  for (std::size_t k : c.k_grid) {
    if (k == 0 || k > c.d) throw ConfigError("k_grid", "ranks must satisfy 1 <= k <= d");
  }
  if (c.k0 && (*c.k0 == 0 || *c.k0 > c.d)) throw ConfigError("k0", "must satisfy 1 <= k0 <= d");
  if (c.k1 && (*c.k1 == 0 || *c.k1 > c.d)) throw ConfigError("k1", "must satisfy 1 <= k1 <= d");
  switch (c.command) {
    case Command::power:
    case Command::lecam:
      if (c.rho_grid.empty() && c.rho_multipliers.empty()) {
        throw ConfigError("rho_grid", "either rho_grid or rho_multipliers is required");
      }
      break;
    case Command::confset:
      if (c.n < 4) throw ConfigError("n", "confidence sets need n >= 4");
      break;
    case Command::theorem4_demo: {
      const std::size_t k0 = c.k0.value_or(1);
      const std::size_t k1 = c.k1.value_or(4);
      if (k0 >= k1) throw ConfigError("k0", "must be smaller than k1");
      break;
    }
    default:
      break;
  }
  if (c.command == Command::lecam || c.command == Command::theorem4_demo) {
    positive("detect_reps", c.detect_reps);
  }
}

}  // namespace lowrank::bench
