#include "lowrank/detect.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowrank/parallel.hpp"

namespace lowrank {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

double low_dim_statistic(const Dataset& dataset) {
  const auto& rows = dataset.design().rows();
  const Eigen::VectorXd& y = dataset.responses();
  const double n = static_cast<double>(dataset.size());
  const Eigen::VectorXd weighted_sum = rows.transpose() * y;
  const double diagonal = y.cwiseAbs2().dot(rows.rowwise().squaredNorm());
  return (weighted_sum.squaredNorm() - diagonal) / (n * (n - 1.0));
}

}  // namespace

std::string_view to_string(Regime regime) {
  return regime == Regime::high_dim ? "high_dim" : "low_dim";
}

Regime regime_for(std::size_t n, std::size_t d) {
  return n < d * d ? Regime::high_dim : Regime::low_dim;
}

double detection_rate(const RateQuery& q) {
  if (q.n == 0 || q.d == 0) throw InvalidArgument("n and d must be positive");
  if (q.k == 0 || q.k > q.d) throw InvalidArgument("need 1 <= k <= d");
  const double n = static_cast<double>(q.n);
  const double frob = std::min(std::sqrt(static_cast<double>(q.d) / n), std::pow(n, -0.25));
  return q.norm_tag == NormTag::frobenius ? frob : std::sqrt(static_cast<double>(q.k)) * frob;
}

double test_scale(std::size_t n, std::size_t d) {
  const double nn = static_cast<double>(n);
  return regime_for(n, d) == Regime::high_dim ? 1.0 / std::sqrt(nn)
                                              : static_cast<double>(d) / nn;
}

double statistic(const Dataset& dataset) {
  const std::size_t n = dataset.size();
  if (regime_for(n, dataset.dim()) == Regime::high_dim) {
    return dataset.responses().squaredNorm() / static_cast<double>(n) - 1.0;
  }
  if (n < 2) throw InvalidArgument("U-statistic needs n >= 2");
  return low_dim_statistic(dataset);
}

double pairwise_u_statistic(const Dataset& dataset) {
  const std::size_t n = dataset.size();
  if (n < 2) throw InvalidArgument("U-statistic needs n >= 2");
  if (n > kMaxPairwiseSamples) {
    throw GuardViolation("pairwise U-statistic: n = " + std::to_string(n) + " exceeds " +
                         std::to_string(kMaxPairwiseSamples));
  }
  const auto& rows = dataset.design().rows();
  const Eigen::MatrixXd gram = rows * rows.transpose();
  const Eigen::VectorXd& y = dataset.responses();
  double sum = 0.0;
  for (Eigen::Index j = 1; j < gram.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) sum += y(i) * y(j) * gram(i, j);
  }
  const double nn = static_cast<double>(n);
  return 2.0 * sum / (nn * (nn - 1.0));
}

DetectionTest make_test(std::size_t n, std::size_t d, double alpha, double z_alpha,
                        std::string calibration) {
  require_alpha(alpha);
  if (n == 0 || d == 0) throw InvalidArgument("n and d must be positive");
  if (regime_for(n, d) == Regime::low_dim && n < 2) {
    throw InvalidArgument("U-statistic needs n >= 2");
  }
  DetectionTest test;
  test.n = n;
  test.d = d;
  test.regime = regime_for(n, d);
  test.alpha = alpha;
  test.z_alpha = z_alpha;
  test.tau = test_scale(n, d);
  test.calibration = std::move(calibration);
  return test;
}

DetectionTest calibrate(std::size_t n, std::size_t d, double alpha, const Calibration& method,
                        const RngStream& rng, std::size_t threads) {
  require_alpha(alpha);
  check_design_budget(n, d);
  const double tau = test_scale(n, d);
  auto null_scores = [&](std::size_t reps) {
    const SquareMatrix zero(d);
    return parallel_map<double>(reps, threads, [&](std::size_t r) {
      return statistic(generate_dataset(n, d, zero, rng.child(r))) / tau;
    });
  };

  if (method.kind == Calibration::Kind::analytic) {
    if (regime_for(n, d) == Regime::high_dim) {
      return make_test(n, d, alpha, std::sqrt(3.0 / alpha), "analytic");
    }
    const std::size_t pilot = std::max<std::size_t>(method.replications / 4, 25);
    const std::vector<double> scores = null_scores(pilot);
    const double m = static_cast<double>(scores.size());
    double second_moment = 0.0;
    double fourth_moment = 0.0;
    for (double s : scores) {
      second_moment += s * s;
      fourth_moment += s * s * s * s;
    }
    second_moment /= m;
    fourth_moment /= m;
    DetectionTest test =
        make_test(n, d, alpha, std::sqrt(second_moment / alpha), "analytic-empirical");
    // Delta method on z = sqrt(m2 / alpha).
    const double m2_se =
        std::sqrt(std::max(fourth_moment - second_moment * second_moment, 0.0) / m);
    if (second_moment > 0.0) test.z_alpha_std_error = m2_se / (2.0 * std::sqrt(second_moment * alpha));
    return test;
  }

  if (method.replications < 100) {
    throw InvalidArgument("Monte Carlo calibration needs at least 100 replications");
  }
  std::vector<double> scores = null_scores(method.replications);
  std::sort(scores.begin(), scores.end());
  const double b = static_cast<double>(scores.size());
  auto order_stat = [&](double rank) {
    const auto idx = static_cast<std::ptrdiff_t>(std::ceil(rank)) - 1;
    return scores[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        idx, 0, static_cast<std::ptrdiff_t>(scores.size()) - 1))];
  };
  DetectionTest test = make_test(n, d, alpha, order_stat((1.0 - alpha) * b), "monte_carlo");
  // Order-statistic interval one binomial standard deviation wide on each side.
  const double spread = std::sqrt(b * alpha * (1.0 - alpha));
  test.z_alpha_std_error =
      0.5 * (order_stat((1.0 - alpha) * b + spread) - order_stat((1.0 - alpha) * b - spread));
  return test;
}

Decision decide(const DetectionTest& test, double statistic_value) {
  return statistic_value >= test.threshold() ? Decision::reject : Decision::accept;
}

Decision decide(const DetectionTest& test, const Dataset& dataset) {
  if (dataset.size() != test.n || dataset.dim() != test.d) {
    throw InvalidArgument("dataset (n=" + std::to_string(dataset.size()) +
                          ", d=" + std::to_string(dataset.dim()) +
                          ") does not match the calibrated test (n=" + std::to_string(test.n) +
                          ", d=" + std::to_string(test.d) + ")");
  }
  return decide(test, statistic(dataset));
}

RejectionRate rejection_rate(std::size_t rejections, std::size_t replications) {
  if (replications == 0) throw InvalidArgument("need at least one replication");
  const double p = static_cast<double>(rejections) / static_cast<double>(replications);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(replications)), replications};
}

RejectionRate empirical_size(const DetectionTest& test, std::size_t reps, const RngStream& rng,
                             std::size_t threads) {
  const SquareMatrix zero(test.d);
  return empirical_power(test, reps, rng, threads,
                         [&](std::size_t, const RngStream&) { return zero; });
}

std::vector<PowerPoint> power_curve(const DetectionTest& test, std::size_t k, NormTag norm_tag,
                                    const std::vector<double>& rho_grid, std::size_t reps,
                                    const RngStream& rng, std::size_t threads, Spectrum spectrum) {
  if (k == 0 || k > test.d) throw InvalidArgument("need 1 <= k <= d");
  check_design_budget(test.n, test.d);
  std::vector<PowerPoint> curve;
  curve.reserve(rho_grid.size());
  for (std::size_t g = 0; g < rho_grid.size(); ++g) {
    const double rho = rho_grid[g];
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be non-negative");
    const SquareMatrix zero(test.d);
    const RejectionRate power = empirical_power(
        test, reps, rng.child(g), threads, [&](std::size_t, const RngStream& stream) {
          if (rho == 0.0) return zero;
          return draw_random_low_rank(test.d, k, rho, norm_tag, stream, spectrum);
        });
    curve.push_back({rho, power});
  }
  return curve;
}

}  // namespace lowrank
