#include "lowrank/bench/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lowrank/bench/plot.hpp"
#include "lowrank/detect.hpp"
#include "lowrank/estimate.hpp"
#include "lowrank/lecam.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/priors.hpp"
#include "lowrank/trace_model.hpp"

namespace lowrank::bench {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class RowSink {
 public:
  explicit RowSink(const ExperimentConfig& c) : config_(c), version_(version_string()) {}

  /// Starts a new configuration point; rows added afterwards share its id.
  void next_point(std::size_t n, std::size_t k, std::optional<double> rho) {
    char id[64];
    std::snprintf(id, sizeof id, "%s-%04zu", std::string(to_string(config_.command)).c_str(),
                  point_++);
    id_ = id;
    n_ = n;
    k_ = k;
    rho_ = rho;
  }

  void add(const std::string& name, double value, std::optional<double> se, std::size_t reps) {
    rows_.push_back({id_, std::string(to_string(config_.command)), n_, config_.d, k_,
                     std::string(to_string(config_.norm_tag)), rho_, name, value, se, reps,
                     config_.master_seed, version_});
  }
  void add(const std::string& name, const RejectionRate& rate) {
    add(name, rate.rate, rate.std_error, rate.replications);
  }
  void add_exact(const std::string& name, double value) { add(name, value, std::nullopt, 0); }

  std::vector<ResultRow> take() { return std::move(rows_); }

 private:
  const ExperimentConfig& config_;
  std::string version_;
  std::vector<ResultRow> rows_;
  std::size_t point_ = 0;
  std::string id_;
  std::size_t n_ = 0, k_ = 0;
  std::optional<double> rho_;
};

Calibration calibration_of(const ExperimentConfig& c) {
  return c.calibration == "analytic" ? Calibration::analytic(c.calibration_reps)
                                     : Calibration::monte_carlo(c.calibration_reps);
}

void add_threshold(RowSink& sink, const DetectionTest& test, std::size_t reps,
                   const std::string& name = "z_alpha") {
  if (test.calibration == "analytic" || test.calibration == "fixed") {
    sink.add_exact(name, test.z_alpha);
  } else {
    sink.add(name, test.z_alpha, test.z_alpha_std_error, reps);
  }
}

std::vector<double> separations(const ExperimentConfig& c, std::size_t n) {
  if (!c.rho_grid.empty()) return c.rho_grid;
  const double rate = detection_rate({c.norm_tag, n, c.d, c.k});
  std::vector<double> out;
  for (double m : c.rho_multipliers) out.push_back(m * rate);
  return out;
}

/// Sample median with an order-statistic standard error (ranks m/2 +- sqrt(m)/2).
std::pair<double, double> median_with_error(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  const double median = m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  const double half = 0.5 * std::sqrt(static_cast<double>(m));
  auto at = [&](double rank) {
    const auto idx = static_cast<std::ptrdiff_t>(std::llround(rank));
    return v[static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(m) - 1))];
  };
  const double centre = 0.5 * static_cast<double>(m) - 0.5;
  return {median, 0.5 * (at(centre + half) - at(centre - half))};
}

void run_calibrate(const ExperimentConfig& c, const RngStream& rng, std::size_t threads,
                   RowSink& sink) {
  sink.next_point(c.n, c.k, std::nullopt);
  sink.add_exact("regime_low_dim", regime_for(c.n, c.d) == Regime::low_dim ? 1.0 : 0.0);
  sink.add_exact("tau", test_scale(c.n, c.d));
  const DetectionTest mc =
      calibrate(c.n, c.d, c.alpha, Calibration::monte_carlo(c.calibration_reps), rng.child(0), threads);
  const DetectionTest an =
      calibrate(c.n, c.d, c.alpha, Calibration::analytic(c.calibration_reps), rng.child(1), threads);
  add_threshold(sink, mc, c.calibration_reps, "z_alpha_monte_carlo");
  add_threshold(sink, an, std::max<std::size_t>(c.calibration_reps / 4, 25), "z_alpha_analytic");
  sink.add("size_monte_carlo", empirical_size(mc, c.reps, rng.child(2), threads));
  sink.add("size_analytic", empirical_size(an, c.reps, rng.child(3), threads));
}

void run_power(const ExperimentConfig& c, const RngStream& rng, std::size_t threads,
               RowSink& sink) {
  const DetectionTest test = calibrate(c.n, c.d, c.alpha, calibration_of(c), rng.child(0), threads);
  sink.next_point(c.n, c.k, std::nullopt);
  add_threshold(sink, test, c.calibration_reps);
  sink.add_exact("detection_rate", detection_rate({c.norm_tag, c.n, c.d, c.k}));
  const auto curve =
      power_curve(test, c.k, c.norm_tag, separations(c, c.n), c.reps, rng.child(1), threads);
  for (const PowerPoint& p : curve) {
    sink.next_point(c.n, c.k, p.rho);
    sink.add("power", p.power);
  }
}

std::vector<std::size_t> phase_grid(const ExperimentConfig& c) {
  if (!c.n_grid.empty()) return c.n_grid;
  const std::size_t d2 = c.d * c.d;
  return {std::max<std::size_t>(d2 / 2, 2), d2, 2 * d2, 4 * d2};
}

void run_phase(const ExperimentConfig& c, const RngStream& rng, std::size_t threads,
               RowSink& sink) {
  const std::vector<std::size_t> grid = phase_grid(c);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t n = grid[i];
    const RngStream point = rng.child(i);
    const DetectionTest test = calibrate(n, c.d, c.alpha, calibration_of(c), point.child(0), threads);
    sink.next_point(n, c.k, std::nullopt);
    sink.add_exact("regime_low_dim", test.regime == Regime::low_dim ? 1.0 : 0.0);
    sink.add_exact("detection_rate", detection_rate({c.norm_tag, n, c.d, c.k}));
    add_threshold(sink, test, c.calibration_reps);
    sink.add("size", empirical_size(test, c.reps, point.child(1), threads));
    const std::vector<double> rhos = separations(c, n);
    if (rhos.empty()) continue;
    const auto curve = power_curve(test, c.k, c.norm_tag, rhos, c.reps, point.child(2), threads);
    for (const PowerPoint& p : curve) {
      sink.next_point(n, c.k, p.rho);
      sink.add("power", p.power);
    }
  }
}

void add_certificate(RowSink& sink, const Certificate& cert, const CertificateRequest& q) {
  sink.add_exact("certified_regime", cert.in_certified_regime ? 1.0 : 0.0);
  sink.add_exact("gamma", cert.gamma);
  if (cert.report) {
    const ChiSquareReport& r = *cert.report;
    sink.add_exact("enumeration_size", static_cast<double>(cert.enumeration_size));
    sink.add("mean_z", r.mean_z, r.mean_z_std_error, r.replications);
    sink.add("mean_z_squared", r.mean_z_squared, r.mean_z_squared_std_error, r.replications);
    sink.add_exact("chi_square_sanity_ok", r.sanity_ok() ? 1.0 : 0.0);
    if (r.sanity_ok()) {
      const double chi = *r.chi_square;
      const double se = cert.chi_square_std_error;
      sink.add("chi_square", chi, se, r.replications);
      const double hi = minimax_error_lower_bound(std::max(0.0, chi - se));
      const double lo = minimax_error_lower_bound(std::max(0.0, chi + se));
      sink.add("lower_bound", cert.lower_bound, 0.5 * (hi - lo), r.replications);
    }
  } else {
    sink.add_exact("chi_square", cert.chi_square);
    sink.add_exact("lower_bound", cert.lower_bound);
  }
  if (cert.closed_form_chi_square) {
    sink.add_exact("closed_form_chi_square", *cert.closed_form_chi_square);
    sink.add_exact("closed_form_lower_bound",
                   minimax_error_lower_bound(std::max(0.0, *cert.closed_form_chi_square)));
  }
  auto fraction = [&](const std::string& name, double p) {
    if (cert.h1_exact) {
      sink.add_exact(name, p);
    } else {
      sink.add(name, p, std::sqrt(p * (1.0 - p) / static_cast<double>(cert.h1_checked)),
               cert.h1_checked);
    }
  };
  fraction("h1_fraction", cert.h1_fraction);
  if (cert.composite_h1_fraction) fraction("composite_h1_fraction", *cert.composite_h1_fraction);
  sink.add("detect_size", cert.detect_size);
  sink.add("detect_miss", cert.detect_miss);
  sink.add("detect_total_error", cert.detect_total_error, cert.detect_total_error_std_error,
           q.detect_reps);
}

CertificateRequest certificate_request(const ExperimentConfig& c, std::size_t k, NormTag tag,
                                       double rho) {
  CertificateRequest q;
  q.n = c.n;
  q.d = c.d;
  q.k = k;
  q.norm_tag = tag;
  q.rho = rho;
  q.reps = c.reps;
  q.alpha = c.alpha;
  q.calibration_reps = c.calibration_reps;
  q.detect_reps = c.detect_reps;
  return q;
}

void run_lecam(const ExperimentConfig& c, const RngStream& rng, std::size_t threads,
               RowSink& sink) {
  const std::vector<double> rhos = separations(c, c.n);
  for (std::size_t g = 0; g < rhos.size(); ++g) {
    CertificateRequest q = certificate_request(c, c.k, c.norm_tag, rhos[g]);
    if (c.k0 && *c.k0 < c.k) q.composite_k0 = c.k0;
    sink.next_point(c.n, c.k, rhos[g]);
    add_certificate(sink, certify_no_test(q, rng.child(g), threads), q);
  }
}

EstimatorConfig estimator_of(const ExperimentConfig& c) {
  EstimatorConfig e;
  e.penalty_scale = c.penalty_scale;
  return e;
}

struct ConfsetDraw {
  bool covered = false;
  double diameter = 0.0;
  double squared_error = 0.0;
};

void run_confset(const ExperimentConfig& c, const RngStream& rng, std::size_t threads,
                 RowSink& sink) {
  const EstimatorConfig est = estimator_of(c);
  const std::size_t n2 = c.n - (c.n + 1) / 2;
  const double z = centered_chi_square_quantile(n2, c.alpha, c.calibration_reps, rng.child(0));
  const std::vector<std::size_t> ranks = c.k_grid.empty() ? std::vector<std::size_t>{c.k} : c.k_grid;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const std::size_t k = ranks[i];
    const RngStream point = rng.child(1 + i);
    const auto draws = parallel_map<ConfsetDraw>(c.reps, threads, [&](std::size_t r) {
      const RngStream stream = point.child(r);
      const SquareMatrix theta =
          draw_random_low_rank(c.d, k, c.signal_norm, NormTag::frobenius, stream.child(0));
      const Dataset data = generate_dataset(c.n, c.d, theta, stream.child(1));
      const FrobeniusConfidenceSet set = frobenius_confidence_set(data, c.alpha, est, z);
      const LassoResult full = matrix_lasso(data, est);
      const double err = frobenius_norm(full.estimate - theta);
      return ConfsetDraw{set.ball.contains(theta), set.ball.diameter(), err * err};
    });
    std::size_t covered = 0;
    std::vector<double> diameters, errors;
    for (const ConfsetDraw& dr : draws) {
      covered += dr.covered ? 1 : 0;
      diameters.push_back(dr.diameter);
      errors.push_back(dr.squared_error);
    }
    sink.next_point(c.n, k, std::nullopt);
    sink.add("coverage", rejection_rate(covered, c.reps));
    const auto [diam, diam_se] = median_with_error(diameters);
    sink.add("median_diameter", diam, diam_se, c.reps);
    const double root_d = std::sqrt(static_cast<double>(c.d));
    sink.add("median_nuclear_diameter", diam * root_d, diam_se * root_d, c.reps);
    const auto [err, err_se] = median_with_error(errors);
    sink.add("median_squared_error", err, err_se, c.reps);
    sink.add_exact("rate_kd_over_n", static_cast<double>(k * c.d) / static_cast<double>(c.n));
  }
}

void run_theorem4_demo(const ExperimentConfig& c, const RngStream& rng, std::size_t threads,
                       RowSink& sink) {
  const std::size_t k0 = c.k0.value_or(1);
  const std::vector<std::size_t> k1_grid =
      c.k_grid.empty() ? std::vector<std::size_t>{2, 4, 8} : c.k_grid;
  const double dn = static_cast<double>(c.d) / static_cast<double>(c.n);
  const double target = static_cast<double>(k0) * std::sqrt(dn);
  for (std::size_t k1 : k1_grid) {
    sink.next_point(c.n, k1, std::nullopt);
    const double floor = std::sqrt(static_cast<double>(k1) * dn);
    sink.add_exact("honest_floor", floor);
    sink.add_exact("adaptive_target", target);
    sink.add_exact("floor_to_target", floor / target);
  }

  const std::size_t k1 = c.k1.value_or(4);
  const double rho = 0.3 * std::sqrt(static_cast<double>(k1) * dn);
  CertificateRequest q = certificate_request(c, k1, NormTag::nuclear, rho);
  q.composite_k0 = k0;
  sink.next_point(c.n, k1, rho);
  add_certificate(sink, certify_no_test(q, rng.child(0), threads), q);

  // The confidence-set test of R(k0) against the composite alternative, at the same rho.
  const EstimatorConfig est = estimator_of(c);
  const std::size_t n2 = c.n - (c.n + 1) / 2;
  const double z = centered_chi_square_quantile(n2, c.alpha, c.calibration_reps, rng.child(1));
  const BlockRademacherPrior prior(c.d, k1, gamma_for_separation(NormTag::nuclear, rho, c.d, k1));
  auto rejections = [&](const RngStream& base, bool null) {
    const auto flags = parallel_map<char>(c.detect_reps, threads, [&](std::size_t r) {
      const RngStream stream = base.child(r);
      const SquareMatrix theta =
          null ? draw_random_low_rank(c.d, k0, c.signal_norm, NormTag::frobenius, stream.child(0))
               : draw_block_rademacher(prior, stream.child(0));
      const Dataset data = generate_dataset(c.n, c.d, theta, stream.child(1));
      const FrobeniusConfidenceSet set = frobenius_confidence_set(data, c.alpha, est, z);
      return confset_to_test(set.ball, k0, rho) == Decision::reject ? char{1} : char{0};
    });
    std::size_t count = 0;
    for (char f : flags) count += static_cast<std::size_t>(f);
    return rejection_rate(count, c.detect_reps);
  };
  sink.add("confset_test_size", rejections(rng.child(2), true));
  const RejectionRate power = rejections(rng.child(3), false);
  sink.add("confset_test_miss", 1.0 - power.rate, power.std_error, power.replications);
}

std::vector<ResultRow> load_rows(const ExperimentConfig& c) {
  const std::string path =
      c.input_csv.empty() ? (fs::path(c.output_dir) / "results.csv").string() : c.input_csv;
  std::ifstream in(path);
  if (!in) throw ConfigError("input_csv", "cannot open '" + path + "'");
  return read_csv(in);
}

std::vector<std::pair<PlotKind, std::vector<ResultRow>>> plots_for(
    Command command, const std::vector<ResultRow>& rows) {
  std::vector<std::pair<PlotKind, std::vector<ResultRow>>> out;
  auto want = [&](PlotKind kind, std::vector<ResultRow> selected) {
    if (!selected.empty()) out.emplace_back(kind, std::move(selected));
  };
  std::vector<ResultRow> power, phase, bars;
  for (const ResultRow& r : rows) {
    if (r.command == "power" && r.statistic_name == "power") power.push_back(r);
    if (r.command == "phase" && (r.statistic_name == "size" || r.statistic_name == "power")) {
      phase.push_back(r);
    }
    if (r.command == "confset" && r.statistic_name == "median_diameter") bars.push_back(r);
  }
  switch (command) {
    case Command::power: want(PlotKind::power_curve, power); break;
    case Command::phase: want(PlotKind::phase_diagram, phase); break;
    case Command::confset: want(PlotKind::diameter_bars, bars); break;
    case Command::report:
      want(PlotKind::power_curve, power);
      want(PlotKind::phase_diagram, phase);
      want(PlotKind::diameter_bars, bars);
      break;
    default: break;
  }
  return out;
}

json dataset_json(const Dataset& data) {
  json design = json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.design().rows().row(static_cast<Eigen::Index>(i));
    design.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  json doc{{"n", data.size()},
           {"d", data.dim()},
           {"layout", "row i is X^i flattened column-major"},
           {"design", design},
           {"responses", std::vector<double>(data.responses().data(),
                                             data.responses().data() + data.responses().size())}};
  if (data.truth()) {
    const auto& t = data.truth()->values();
    doc["truth_column_major"] = std::vector<double>(t.data(), t.data() + t.size());
  }
  return doc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<ResultRow> compute_rows(const ExperimentConfig& config) {
  validate(config);
  if (config.command == Command::report) return load_rows(config);
  const std::size_t threads = resolve_threads(config.threads);
  const RngStream rng(config.master_seed, 0);
  RowSink sink(config);
  switch (config.command) {
    case Command::calibrate: run_calibrate(config, rng, threads, sink); break;
    case Command::power: run_power(config, rng, threads, sink); break;
    case Command::phase: run_phase(config, rng, threads, sink); break;
    case Command::lecam: run_lecam(config, rng, threads, sink); break;
    case Command::confset: run_confset(config, rng, threads, sink); break;
    case Command::theorem4_demo: run_theorem4_demo(config, rng, threads, sink); break;
    case Command::report: break;
  }
  return sink.take();
}

RunOutput run(const ExperimentConfig& config, const RunOptions& options) {
  RunOutput output;
  output.rows = compute_rows(config);
  const auto plots = options.plots ? plots_for(config.command, output.rows)
                                   : std::vector<std::pair<PlotKind, std::vector<ResultRow>>>{};
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("results.csv", to_csv(output.rows));
  for (const auto& [kind, rows] : plots) {
    files.emplace_back(std::string(to_string(kind)) + ".svg", emit_plot(rows, kind));
  }
  if (options.dump_data && config.command != Command::report) {
    const RngStream rng(config.master_seed, 1);
    const SquareMatrix theta =
        config.command == Command::calibrate
            ? SquareMatrix(config.d)
            : draw_random_low_rank(config.d, config.k, config.signal_norm, config.norm_tag,
                                   rng.child(0));
    files.emplace_back("dataset.json",
                       dataset_json(generate_dataset(config.n, config.d, theta, rng.child(1)))
                               .dump(1) +
                           "\n");
  }
  for (const auto& f : files) output.files.push_back(f.first);
  output.files.push_back("manifest.json");

  json manifest{{"version", version_string()},
                {"config", to_json(config)},
                {"resolved_threads", resolve_threads(config.threads)},
                {"rows", output.rows.size()},
                {"files", output.files}};
  files.emplace_back("manifest.json", manifest.dump(2) + "\n");
  if (options.dry_run) return output;

  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& [name, text] : files) write_text(dir / name, text);
  return output;
}

}  // namespace lowrank::bench
