#include "lowrank/lecam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lowrank/parallel.hpp"

namespace lowrank {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kAtomChunk = 4096;
constexpr std::size_t kNoiseChunk = 1000;
constexpr std::size_t kMaxClosedFormDim = 64;

/// Running log-sum-exp accumulator.
class LogSumExp {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

/// Neumaier-compensated running mean and second moment of a sample.
class MomentAccumulator {
 public:
  void add(double x) {
    add_compensated(sum_, comp_, x);
    add_compensated(sum_sq_, comp_sq_, x * x);
    ++count_;
  }
  double mean() const { return (sum_ + comp_) / static_cast<double>(count_); }
  double std_error() const {
    if (count_ < 2) return 0.0;
    const double n = static_cast<double>(count_);
    const double m = mean();
    const double var = std::max(0.0, ((sum_sq_ + comp_sq_) / n - m * m) * n / (n - 1.0));
    return std::sqrt(var / n);
  }

 private:
  static void add_compensated(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double sum_ = 0.0, comp_ = 0.0, sum_sq_ = 0.0, comp_sq_ = 0.0;
  std::size_t count_ = 0;
};

/// Prior atoms in the layout the design acts on, with cached log-weights.
struct ProjectedPrior {
  explicit ProjectedPrior(const DiscretePrior& prior)
      : coefficients(prior.coefficient_matrix()), log_weights(prior.size()) {
    for (std::size_t a = 0; a < prior.size(); ++a) {
      log_weights[a] = prior.weights()[a] > 0.0 ? std::log(prior.weights()[a]) : kNegInf;
    }
  }

  /// log Z for responses y against design rows, in chunks of atoms.
  double log_z(const DesignRows& rows, const Eigen::VectorXd& y) const {
    LogSumExp acc;
    const Eigen::Index atoms = coefficients.cols();
    for (Eigen::Index start = 0; start < atoms; start += kAtomChunk) {
      const Eigen::Index len = std::min<Eigen::Index>(kAtomChunk, atoms - start);
      const Eigen::MatrixXd means = rows * coefficients.middleCols(start, len);
      const Eigen::RowVectorXd cross = y.transpose() * means;
      const Eigen::RowVectorXd energy = means.colwise().squaredNorm();
      for (Eigen::Index a = 0; a < len; ++a) {
        acc.add(log_weights[static_cast<std::size_t>(start + a)] + cross(a) - 0.5 * energy(a));
      }
    }
    return acc.value();
  }

  Eigen::MatrixXd coefficients;
  std::vector<double> log_weights;
};

void require_prior_dims(const DiscretePrior& prior, std::size_t d) {
  if (prior.dim() != d) {
    throw InvalidArgument("prior dimension " + std::to_string(prior.dim()) +
                          " does not match data dimension " + std::to_string(d));
  }
}

void require_enumerable(const DiscretePrior& prior) {
  if (prior.size() > kMaxEnumeratedAtoms) {
    throw GuardViolation("enumeration budget: " + std::to_string(prior.size()) +
                         " atoms exceeds 2^20");
  }
}

double log_binomial_probability(std::size_t m, std::size_t j) {
  return std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
         std::lgamma(static_cast<double>(m - j) + 1.0) - static_cast<double>(m) * std::log(2.0);
}

}  // namespace

double log_averaged_likelihood_ratio(const Dataset& dataset, const DiscretePrior& prior) {
  require_prior_dims(prior, dataset.dim());
  require_enumerable(prior);
  return ProjectedPrior(prior).log_z(dataset.design().rows(), dataset.responses());
}

double averaged_likelihood_ratio(const Dataset& dataset, const DiscretePrior& prior) {
  return std::exp(log_averaged_likelihood_ratio(dataset, prior));
}

ChiSquareReport chi_square_divergence(const DiscretePrior& prior, std::size_t n, std::size_t reps,
                                      const RngStream& rng, std::size_t threads) {
  require_enumerable(prior);
  if (n == 0 || reps == 0) throw InvalidArgument("n and reps must be positive");
  const std::size_t d = prior.dim();
  check_design_budget(n, d);
  const ProjectedPrior projected(prior);
  const SquareMatrix zero(d);
  const std::vector<double> log_z = parallel_map<double>(reps, threads, [&](std::size_t r) {
    const Dataset data = generate_dataset(n, d, zero, rng.child(r));
    return projected.log_z(data.design().rows(), data.responses());
  });

  MomentAccumulator z, z2;
  for (double lz : log_z) {
    z.add(std::exp(lz));
    z2.add(std::exp(2.0 * lz));
  }
  ChiSquareReport report;
  report.mean_z = z.mean();
  report.mean_z_std_error = z.std_error();
  report.mean_z_squared = z2.mean();
  report.mean_z_squared_std_error = z2.std_error();
  report.replications = reps;
  report.enumeration_size = prior.size();
  const double deviation = std::abs(report.mean_z - 1.0);
  const bool gate = report.mean_z_std_error > 0.0 ? deviation <= 3.0 * report.mean_z_std_error
                                                  : deviation <= 1e-12;
  if (gate) report.chi_square = report.mean_z_squared - 1.0;
  return report;
}

double conditional_second_moment_exact(const Design& design, const DiscretePrior& prior) {
  require_prior_dims(prior, design.dim());
  if (prior.size() > kMaxPairAtoms) {
    throw GuardViolation("pair enumeration budget: " + std::to_string(prior.size()) +
                         " atoms exceeds 1024");
  }
  const ProjectedPrior projected(prior);
  const Eigen::MatrixXd means = design.rows() * projected.coefficients;
  const Eigen::MatrixXd gram = means.transpose() * means;
  LogSumExp acc;
  for (Eigen::Index b = 0; b < gram.cols(); ++b) {
    for (Eigen::Index a = 0; a < gram.rows(); ++a) {
      acc.add(projected.log_weights[static_cast<std::size_t>(a)] +
              projected.log_weights[static_cast<std::size_t>(b)] + gram(a, b));
    }
  }
  return std::exp(acc.value());
}

SecondMomentCheck conditional_second_moment_check(const Design& design, const DiscretePrior& prior,
                                                  std::size_t y_reps, const RngStream& rng,
                                                  std::size_t threads) {
  if (y_reps == 0) throw InvalidArgument("y_reps must be positive");
  const double exact = conditional_second_moment_exact(design, prior);

  const ProjectedPrior projected(prior);
  const Eigen::MatrixXd means = design.rows() * projected.coefficients;
  Eigen::RowVectorXd offsets = -0.5 * means.colwise().squaredNorm();
  for (Eigen::Index a = 0; a < offsets.size(); ++a) {
    offsets(a) += projected.log_weights[static_cast<std::size_t>(a)];
  }
  const auto n = static_cast<Eigen::Index>(design.size());
  const std::size_t chunks = (y_reps + kNoiseChunk - 1) / kNoiseChunk;
  const std::vector<std::vector<double>> z2 =
      parallel_map<std::vector<double>>(chunks, threads, [&](std::size_t c) {
        const std::size_t len = std::min(kNoiseChunk, y_reps - c * kNoiseChunk);
        Sampler sampler(rng.child(c));
        Eigen::MatrixXd ys(n, static_cast<Eigen::Index>(len));
        sampler.fill_normal(std::span<double>(ys.data(), static_cast<std::size_t>(ys.size())));
        const Eigen::MatrixXd logs = (means.transpose() * ys).colwise() + offsets.transpose();
        std::vector<double> out(len);
        for (std::size_t j = 0; j < len; ++j) {
          LogSumExp acc;
          for (Eigen::Index a = 0; a < logs.rows(); ++a) acc.add(logs(a, static_cast<Eigen::Index>(j)));
          out[j] = std::exp(2.0 * acc.value());
        }
        return out;
      });
  MomentAccumulator acc;
  for (const auto& chunk : z2) {
    for (double v : chunk) acc.add(v);
  }
  SecondMomentCheck check;
  check.monte_carlo_value = acc.mean();
  check.monte_carlo_std_error = acc.std_error();
  check.exact_value = exact;
  check.relative_gap = std::abs(check.monte_carlo_value - exact) / exact;
  return check;
}

double block_prior_second_moment(const BlockRademacherPrior& prior, std::size_t n) {
  const std::size_t d = prior.dim();
  if (d > kMaxClosedFormDim) {
    throw GuardViolation("closed-form second moment supports d <= 64, got " + std::to_string(d));
  }
  if (n == 0) throw InvalidArgument("n must be positive");
  // c / gamma^2 = sum_l S_l T_l, an integer in [-d^2, d^2].
  const auto span = static_cast<std::ptrdiff_t>(d * d);
  std::vector<double> law(static_cast<std::size_t>(2 * span + 1), 0.0);
  law[static_cast<std::size_t>(span)] = 1.0;
  for (std::size_t block : prior.block_sizes()) {
    const auto reach = static_cast<std::ptrdiff_t>(d * block);
    std::vector<double> product(static_cast<std::size_t>(2 * reach + 1), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      const double ps = std::exp(log_binomial_probability(d, i));
      const auto s = static_cast<std::ptrdiff_t>(2 * i) - static_cast<std::ptrdiff_t>(d);
      for (std::size_t j = 0; j <= block; ++j) {
        const double pt = std::exp(log_binomial_probability(block, j));
        const auto t = static_cast<std::ptrdiff_t>(2 * j) - static_cast<std::ptrdiff_t>(block);
        product[static_cast<std::size_t>(s * t + reach)] += ps * pt;
      }
    }
    std::vector<double> next(law.size(), 0.0);
    for (std::ptrdiff_t a = -span; a <= span; ++a) {
      const double pa = law[static_cast<std::size_t>(a + span)];
      if (pa == 0.0) continue;
      for (std::ptrdiff_t p = -reach; p <= reach; ++p) {
        const double pp = product[static_cast<std::size_t>(p + reach)];
        if (pp == 0.0 || a + p < -span || a + p > span) continue;
        next[static_cast<std::size_t>(a + p + span)] += pa * pp;
      }
    }
    law.swap(next);
  }

  const double g2 = prior.gamma() * prior.gamma();
  const double s4 = std::pow(g2 * static_cast<double>(d * d), 2);
  const double half_n = 0.5 * static_cast<double>(n);
  LogSumExp acc;
  for (std::ptrdiff_t a = -span; a <= span; ++a) {
    const double p = law[static_cast<std::size_t>(a + span)];
    if (p <= 0.0) continue;
    const double c = g2 * static_cast<double>(a);
    const double base = (1.0 - c) * (1.0 - c) - s4;
    if (base <= 0.0) return std::numeric_limits<double>::infinity();
    acc.add(std::log(p) - half_n * std::log(base));
  }
  return std::exp(acc.value());
}

double minimax_error_lower_bound(double chi_square) {
  if (!(chi_square >= 0.0)) throw InvalidArgument("chi-square divergence must be non-negative");
  if (chi_square == 0.0) return 1.0;
  if (!std::isfinite(chi_square)) return 0.0;
  const double root = std::sqrt(chi_square);
  const double lo = std::log(1e-3);
  const double hi = std::log(1.0 - 1e-3);
  double best = 0.0;
  for (std::size_t i = 0; i < kEtaGridPoints; ++i) {
    const double eta =
        std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kEtaGridPoints - 1));
    best = std::max(best, (1.0 - eta) * (1.0 - root / eta));
  }
  return std::clamp(best, 0.0, 1.0);
}

Certificate certify_no_test(const CertificateRequest& request, const RngStream& rng,
                            std::size_t threads) {
  const auto& q = request;
  if (q.n < 2 || q.d == 0 || q.k == 0 || q.k > q.d) {
    throw InvalidArgument("certificate needs n >= 2 and 1 <= k <= d");
  }
  if (q.reps == 0 || q.detect_reps == 0) throw InvalidArgument("replication counts must be positive");
  if (q.composite_k0 && *q.composite_k0 >= q.k) {
    throw InvalidArgument("composite k0 must be smaller than k");
  }
  Certificate cert;
  cert.in_certified_regime = 4 * q.k <= q.d;
  cert.gamma = gamma_for_separation(q.norm_tag, q.rho, q.d, q.k);
  const BlockRademacherPrior prior(q.d, q.k, cert.gamma);
  if (q.d <= kMaxClosedFormDim) cert.closed_form_chi_square = block_prior_second_moment(prior, q.n) - 1.0;

  const double floor = q.rho * (1.0 - 1e-10);
  // Bit 0: simple alternative, bit 1: composite alternative.
  auto membership = [&](const SquareMatrix& theta) -> char {
    char flags = norm(theta, q.norm_tag) >= floor ? 1 : 0;
    if (q.composite_k0 && nuclear_distance_to_rank(theta, *q.composite_k0) >= floor) flags |= 2;
    return flags;
  };

  std::vector<char> flags;
  if (prior.sign_bits() <= 20) {
    const DiscretePrior atoms = enumerate_prior(prior);
    cert.chi_square_method = "monte_carlo";
    cert.enumeration_size = atoms.size();
    cert.report = chi_square_divergence(atoms, q.n, q.reps, rng.child(0), threads);
    cert.chi_square = cert.report->chi_square.value_or(std::numeric_limits<double>::quiet_NaN());
    cert.chi_square_std_error = cert.report->mean_z_squared_std_error;
    cert.lower_bound =
        cert.report->sanity_ok() ? minimax_error_lower_bound(std::max(0.0, cert.chi_square)) : 0.0;
    flags = parallel_map<char>(atoms.size(), threads,
                               [&](std::size_t a) { return membership(atoms.atoms()[a]); });
    cert.h1_exact = true;
  } else {
    if (!cert.closed_form_chi_square) {
      throw GuardViolation("prior with 2^" + std::to_string(prior.sign_bits()) +
                           " atoms is neither enumerable nor within the closed-form range");
    }
    cert.chi_square_method = "closed_form";
    cert.chi_square = *cert.closed_form_chi_square;
    cert.lower_bound = minimax_error_lower_bound(std::max(0.0, cert.chi_square));
    const RngStream family = rng.child(1);
    flags = parallel_map<char>(q.membership_draws, threads, [&](std::size_t r) {
      return membership(draw_block_rademacher(prior, family.child(r)));
    });
  }
  cert.h1_checked = flags.size();
  std::size_t simple = 0, composite = 0;
  for (char f : flags) {
    simple += (f & 1) != 0 ? 1 : 0;
    composite += (f & 2) != 0 ? 1 : 0;
  }
  const double checked = static_cast<double>(cert.h1_checked);
  cert.h1_fraction = static_cast<double>(simple) / checked;
  if (q.composite_k0) cert.composite_h1_fraction = static_cast<double>(composite) / checked;

  const DetectionTest test =
      calibrate(q.n, q.d, q.alpha, Calibration::monte_carlo(q.calibration_reps), rng.child(2), threads);
  cert.detect_size = empirical_size(test, q.detect_reps, rng.child(3), threads);
  const RejectionRate power = empirical_power(
      test, q.detect_reps, rng.child(4), threads,
      [&](std::size_t, const RngStream& stream) { return draw_block_rademacher(prior, stream); });
  cert.detect_miss = {1.0 - power.rate, power.std_error, power.replications};
  cert.detect_total_error = cert.detect_size.rate + cert.detect_miss.rate;
  cert.detect_total_error_std_error =
      std::hypot(cert.detect_size.std_error, cert.detect_miss.std_error);
  return cert;
}

}  // namespace lowrank
