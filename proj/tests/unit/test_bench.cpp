#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sys/wait.h>
#include <sstream>

#include "lowrank/bench/config.hpp"
#include "lowrank/bench/plot.hpp"
#include "lowrank/bench/results.hpp"
#include "lowrank/bench/runner.hpp"

using namespace lowrank;
using namespace lowrank::bench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lowrank_bench_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_power() {
  ExperimentConfig c;
  c.command = Command::power;
  c.n = 60;
  c.d = 6;
  c.rho_grid = {0.0, 0.5, 1.0};
  c.reps = 200;
  c.calibration_reps = 300;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ResultRow row(const std::string& stat, double value, std::optional<double> rho = std::nullopt) {
  ResultRow r;
  r.experiment_id = "power-0001";
  r.command = "power";
  r.n = 10;
  r.d = 2;
  r.k = 1;
  r.norm_tag = "frobenius";
  r.rho = rho;
  r.statistic_name = stat;
  r.value = value;
  r.std_error = 0.01;
  r.reps = 100;
  r.master_seed = 3;
  r.version = version_string();
  return r;
}

}  // namespace

TEST_CASE("config parsing and round trip") {
  const json doc = json::parse(R"({"command": "lecam", "n": 50, "d": 4, "k": 1, "k0": 1,
    "norm_tag": "nuclear", "alpha": 0.1, "rho_multipliers": [0.3, 5], "reps": 100,
    "master_seed": 18446744073709551615, "threads": "auto", "output_dir": "x"})");
  const ExperimentConfig c = parse_config(doc);
  CHECK(c.command == Command::lecam);
  CHECK(c.norm_tag == NormTag::nuclear);
  CHECK(c.master_seed == 18446744073709551615ull);
  CHECK(c.threads == 0);
  REQUIRE(c.k0);
  CHECK(*c.k0 == 1);
  CHECK(!c.k1);
  const ExperimentConfig back = parse_config(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(to_json(parse_config(to_json(small_power()))) == to_json(small_power()));
}

TEST_CASE("config errors name the field") {
  auto field_of = [](const std::string& text) -> std::string {
    try {
      validate(parse_config(json::parse(text)));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  CHECK(field_of(R"({"n": 10, "d": 2, "rho_grid": [1], "colour": 1})") == "colour");
  CHECK(field_of(R"({"n": -1, "d": 2})") == "n");
  CHECK(field_of(R"({"n": 10, "d": 2, "threads": 0, "rho_grid": [1]})") == "threads");
  CHECK(field_of(R"({"n": 10, "d": 2, "alpha": 1.0, "rho_grid": [1]})") == "alpha");
  CHECK(field_of(R"({"n": 10, "d": 2, "k": 3, "rho_grid": [1]})") == "k");
  CHECK(field_of(R"({"n": 10, "d": 2, "rho_grid": [-1]})") == "rho_grid");
  CHECK(field_of(R"({"n": 10, "d": 2})") == "rho_grid");
  CHECK(field_of(R"({"command": "dance", "n": 10, "d": 2})") == "command");
  CHECK(field_of(R"({"n": 10, "d": 2, "norm_tag": "max", "rho_grid": [1]})") == "norm_tag");
  CHECK(field_of(R"({"command": "calibrate", "n": 10, "d": 2, "calibration": "guess"})") == "calibration");
  CHECK(field_of(R"({"command": "theorem4-demo", "n": 64, "d": 16, "k0": 4, "k1": 2})") == "k0");
  CHECK(field_of(R"({"command": "calibrate", "n": 10, "d": 2})") == "");
  CHECK_THROWS_AS(validate(parse_config(json::parse(R"({"n": 100000, "d": 100, "rho_grid": [1]})"))),
                  GuardViolation);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("csv format and round trip") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(2.0) == "2");
  std::vector<ResultRow> rows{row("power", 0.25, 0.5), row("z_alpha", 1.0 / 3.0)};
  rows[1].std_error.reset();
  const std::string text = to_csv(rows);
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  std::istringstream in(text);
  const std::vector<ResultRow> back = read_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(to_csv(back) == text);
  CHECK(back[1].value == 1.0 / 3.0);
  CHECK(!back[1].std_error);
  CHECK(!back[1].rho);
  std::istringstream bad("wrong,header\n");
  CHECK_THROWS_AS(read_csv(bad), InvalidArgument);
}

TEST_CASE("plots") {
  const std::string one = emit_plot({row("power", 0.4, 1.0)}, PlotKind::power_curve);
  CHECK(one.rfind("<svg", 0) == 0);
  CHECK(one.find("</svg>") != std::string::npos);
  std::size_t markers = 0;
  for (std::size_t p = one.find("class=\"marker\""); p != std::string::npos;
       p = one.find("class=\"marker\"", p + 1))
    ++markers;
  CHECK(markers == 1);
  CHECK(one.find("polyline") == std::string::npos);
  CHECK(one.find("class=\"caption\"") != std::string::npos);

  const std::string curve = emit_plot({row("power", 0.05, 0.0), row("power", 0.5, 1.0),
                                       row("power", 0.97, 2.0)},
                                      PlotKind::power_curve);
  CHECK(curve.find("polyline") != std::string::npos);
  CHECK(curve.find("errorbar") != std::string::npos);

  CHECK_THROWS_AS(emit_plot({}, PlotKind::power_curve), InvalidArgument);
  CHECK_THROWS_AS(emit_plot({row("power", 0.4, 1.0), row("median_diameter", 0.2)}, PlotKind::power_curve),
                  InvalidArgument);
  CHECK_THROWS_AS(emit_plot({row("power", 0.4)}, PlotKind::power_curve), InvalidArgument);
  CHECK_NOTHROW(emit_plot({row("size", 0.05), row("power", 0.9)}, PlotKind::phase_diagram));
  CHECK_NOTHROW(emit_plot({row("median_diameter", 0.3)}, PlotKind::diameter_bars));
}

TEST_CASE("power at rho zero is the level") {
  ExperimentConfig c = small_power();
  c.rho_grid = {0.0};
  c.reps = 1000;
  const auto rows = compute_rows(c);
  int found = 0;
  for (const ResultRow& r : rows) {
    if (r.statistic_name != "power") continue;
    ++found;
    REQUIRE(r.std_error);
    CHECK(std::abs(r.value - c.alpha) <= 3 * std::sqrt(c.alpha * (1 - c.alpha) / c.reps) + 0.01);
  }
  CHECK(found == 1);
}

TEST_CASE("phase regime flips at n = d^2") {
  ExperimentConfig c;
  c.command = Command::phase;
  c.d = 4;
  c.n = 16;
  c.n_grid = {8, 15, 16, 17, 32};
  c.reps = 50;
  c.calibration_reps = 100;
  for (const ResultRow& r : compute_rows(c)) {
    if (r.statistic_name == "regime_low_dim") CHECK(r.value == (r.n >= 16 ? 1.0 : 0.0));
  }
}

TEST_CASE("every monte carlo value carries a standard error") {
  const std::set<std::string> exact{"regime_low_dim", "tau",         "detection_rate", "certified_regime",
                                    "gamma",          "enumeration_size", "closed_form_chi_square",
                                    "closed_form_lower_bound", "chi_square_sanity_ok", "rate_kd_over_n",
                                    "honest_floor", "adaptive_target", "floor_to_target", "z_alpha_analytic",
                                    "h1_fraction", "composite_h1_fraction"};
  std::vector<ExperimentConfig> configs;
  ExperimentConfig cal;
  cal.command = Command::calibrate;
  cal.n = 30;
  cal.d = 4;
  cal.reps = 100;
  cal.calibration_reps = 200;
  configs.push_back(cal);
  configs.push_back(small_power());
  ExperimentConfig lec;
  lec.command = Command::lecam;
  lec.n = 30;
  lec.d = 4;
  lec.rho_multipliers = {0.3};
  lec.reps = 200;
  lec.calibration_reps = 200;
  lec.detect_reps = 100;
  configs.push_back(lec);
  ExperimentConfig conf;
  conf.command = Command::confset;
  conf.n = 100;
  conf.d = 3;
  conf.k_grid = {1, 2};
  conf.reps = 20;
  conf.calibration_reps = 200;
  configs.push_back(conf);
  for (const ExperimentConfig& c : configs) {
    for (const ResultRow& r : compute_rows(c)) {
      if (exact.count(r.statistic_name) == 0) {
        INFO(r.command << " " << r.statistic_name);
        CHECK(r.std_error.has_value());
      }
    }
  }
}

TEST_CASE("results are identical across thread counts") {
  std::vector<ExperimentConfig> configs{small_power()};
  ExperimentConfig conf;
  conf.command = Command::confset;
  conf.n = 80;
  conf.d = 3;
  conf.k_grid = {1, 2};
  conf.reps = 12;
  conf.calibration_reps = 200;
  configs.push_back(conf);
  ExperimentConfig demo;
  demo.command = Command::theorem4_demo;
  demo.n = 40;
  demo.d = 8;
  demo.k1 = 2;
  demo.k_grid = {2};
  demo.reps = 100;
  demo.calibration_reps = 200;
  demo.detect_reps = 30;
  configs.push_back(demo);
  for (ExperimentConfig c : configs) {
    c.threads = 1;
    const std::string one = to_csv(compute_rows(c));
    c.threads = 8;
    CHECK(to_csv(compute_rows(c)) == one);
  }
}

TEST_CASE("run writes a manifest covering every file") {
  ExperimentConfig c = small_power();
  const fs::path dir = scratch_dir("run");
  c.output_dir = dir.string();
  const RunOutput out = run(c, {true, true, false});
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) listed.insert(f.get<std::string>());
  std::set<std::string> present;
  for (const auto& e : fs::directory_iterator(dir)) present.insert(e.path().filename().string());
  CHECK(listed == present);
  CHECK(listed.count("power_curve.svg") == 1);
  CHECK(listed.count("dataset.json") == 1);
  CHECK(parse_config(manifest["config"]).n == c.n);
  CHECK(manifest["version"] == version_string());
  CHECK(slurp(dir / "results.csv") == to_csv(out.rows));

  // report regenerates plots from the CSV.
  ExperimentConfig rep;
  rep.command = Command::report;
  rep.output_dir = (dir / "report").string();
  rep.input_csv = (dir / "results.csv").string();
  const RunOutput again = run(rep, {true, false, false});
  CHECK(to_csv(again.rows) == to_csv(out.rows));
  CHECK(fs::exists(dir / "report" / "power_curve.svg"));
  fs::remove_all(dir);
}

TEST_CASE("cli exit codes") {
  const char* cli = std::getenv("LOWRANK_CLI");
  if (cli == nullptr) {
    MESSAGE("LOWRANK_CLI not set; skipping");
    return;
  }
  const fs::path dir = scratch_dir("cli");
  fs::create_directories(dir);
  auto run_cli = [&](const std::string& config, const std::string& args) {
    std::ofstream(dir / "c.json") << config;
    const std::string cmd = std::string(cli) + " " + args + " --config " + (dir / "c.json").string() +
                            " --out " + (dir / "out").string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run_cli(R"({"n": 60, "d": 6, "rho_grid": [0.5], "reps": 20, "calibration_reps": 100})",
                "power --threads 2 --seed 9") == 0);
  CHECK(json::parse(slurp(dir / "out" / "manifest.json"))["config"]["master_seed"] == 9);
  CHECK(run_cli(R"({"n": 60, "d": 6, "rho_grid": [0.5], "nope": 1})", "power") == 2);
  CHECK(run_cli(R"({"n": 60, "d": 6, "rho_grid": [0.5]})", "power --threads zero") == 2);
  CHECK(run_cli(R"({"command": "phase", "n": 60, "d": 6})", "power") == 2);
  CHECK(run_cli("{not json", "power") == 2);
  CHECK(run_cli(R"({"n": 100000, "d": 100, "rho_grid": [1]})", "power") == 3);
  fs::remove_all(dir);
}
