#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lowrank/bench/config.hpp"
#include "lowrank/bench/runner.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kGuardViolation = 3;

std::size_t parse_threads(const std::string& text) {
  if (text == "auto") return 0;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size() && v > 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw lowrank::bench::ConfigError("threads", "expected a positive integer or \"auto\"");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lowrank::bench;
  CLI::App app{"Low-rank trace regression detection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> threads;
  std::optional<std::string> out_dir;
  RunOptions options;
  for (const char* name :
       {"calibrate", "power", "phase", "lecam", "confset", "theorem4-demo", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--seed", seed, "override master_seed");
    sub->add_option("--threads", threads, "worker count or \"auto\"");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--plots", options.plots, "emit SVG plots");
    sub->add_flag("--dump-data", options.dump_data, "write one generated dataset as JSON");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("--config", "cannot open '" + config_path + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    if (!doc.contains("command")) doc["command"] = command;
    ExperimentConfig config = parse_config(doc);
    if (to_string(config.command) != command) {
      throw ConfigError("command", "config says '" + std::string(to_string(config.command)) +
                                       "' but the CLI asked for '" + command + "'");
    }
    if (seed) config.master_seed = *seed;
    if (threads) config.threads = parse_threads(*threads);
    if (out_dir) config.output_dir = *out_dir;
    const RunOutput output = run(config, options);
    std::cout << "wrote " << output.rows.size() << " rows to " << config.output_dir << "/results.csv\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const lowrank::GuardViolation& e) {
    std::cerr << "guard violation: " << e.what() << '\n';
    return kGuardViolation;
  } catch (const lowrank::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
