#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lowrank/common.hpp"
#include "lowrank/priors.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/trace_model.hpp"

namespace lowrank {

/// high_dim when n < d^2 (norm of Y), low_dim otherwise (pairwise U-statistic).
enum class Regime { high_dim, low_dim };

std::string_view to_string(Regime regime);
Regime regime_for(std::size_t n, std::size_t d);

/// The pairwise Gram route refuses larger n.
inline constexpr std::size_t kMaxPairwiseSamples = 4096;

struct RateQuery {
  NormTag norm_tag;
  std::size_t n;
  std::size_t d;
  std::size_t k;
};

/// Frobenius: min(sqrt(d/n), n^{-1/4}); nuclear: sqrt(k) times that.
double detection_rate(const RateQuery& q);

/// Scale tau_n: n^{-1/2} (high_dim) or d/n (low_dim).
double test_scale(std::size_t n, std::size_t d);

/// r_hat_n. high_dim: |Y|^2/n - 1. low_dim: 2/(n(n-1)) sum_{i<j} Y_i Y_j <X^i, X^j>_F,
/// evaluated through |sum_i Y_i X^i|_F^2 - sum_i Y_i^2 |X^i|_F^2 in O(n d^2).
double statistic(const Dataset& dataset);

/// The low_dim U-statistic summed explicitly over the cached n x n Gram
/// matrix of design inner products. Reference route; n <= kMaxPairwiseSamples.
double pairwise_u_statistic(const Dataset& dataset);

struct Calibration {
  enum class Kind { analytic, monte_carlo };
  Kind kind = Kind::monte_carlo;
  std::size_t replications = 2000;

  static Calibration analytic(std::size_t pilot_replications = 2000) {
    return {Kind::analytic, pilot_replications};
  }
  static Calibration monte_carlo(std::size_t replications = 2000) {
    return {Kind::monte_carlo, replications};
  }
};

/// Psi_n = 1{ r_hat_n >= z_alpha * tau_n } for a fixed (n, d).
struct DetectionTest {
  std::size_t n = 0;
  std::size_t d = 0;
  Regime regime = Regime::high_dim;
  double alpha = 0.05;
  double z_alpha = 0.0;
  double tau = 0.0;
  /// "monte_carlo", "analytic" or "analytic-empirical".
  std::string calibration;
  /// Spread of the threshold estimate (0 for closed-form thresholds).
  double z_alpha_std_error = 0.0;

  double threshold() const { return z_alpha * tau; }
};

/// Threshold from the null law of r_hat/tau. Monte Carlo: empirical (1-alpha)
/// quantile over fresh null datasets. Analytic: Chebyshev, sqrt(3/alpha) in
/// high_dim; in low_dim the null variance comes from a pilot of B/4 runs.
DetectionTest calibrate(std::size_t n, std::size_t d, double alpha, const Calibration& method,
                        const RngStream& rng, std::size_t threads = 1);

DetectionTest make_test(std::size_t n, std::size_t d, double alpha, double z_alpha,
                        std::string calibration = "fixed");

/// Ties reject.
Decision decide(const DetectionTest& test, double statistic_value);
Decision decide(const DetectionTest& test, const Dataset& dataset);

struct RejectionRate {
  double rate = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
};

/// Binomial proportion with its standard error sqrt(p(1-p)/reps).
RejectionRate rejection_rate(std::size_t rejections, std::size_t replications);

/// Rejection frequency under theta = 0 over fresh datasets.
RejectionRate empirical_size(const DetectionTest& test, std::size_t reps, const RngStream& rng,
                             std::size_t threads = 1);

/// Rejection frequency when replication r draws theta_r = signal(r) and fresh data.
template <class SignalFn>
RejectionRate empirical_power(const DetectionTest& test, std::size_t reps, const RngStream& rng,
                              std::size_t threads, SignalFn&& signal);

struct PowerPoint {
  double rho = 0.0;
  RejectionRate power;
};

/// For every rho: reps signals from draw_random_low_rank at norm rho (theta = 0
/// when rho == 0), fresh data each, rejection frequency recorded.
std::vector<PowerPoint> power_curve(const DetectionTest& test, std::size_t k, NormTag norm_tag,
                                    const std::vector<double>& rho_grid, std::size_t reps,
                                    const RngStream& rng, std::size_t threads = 1,
                                    Spectrum spectrum = Spectrum::flat);

}  // namespace lowrank

#include "lowrank/detect_impl.hpp"
