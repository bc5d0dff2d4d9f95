#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lowrank/common.hpp"
#include "lowrank/matrix_core.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/trace_model.hpp"

namespace lowrank {

/// Proximal-gradient settings for the nuclear-norm penalized least squares.
struct EstimatorConfig {
  /// c in lambda = c * sqrt(d / n).
  double penalty_scale = 1.5;
  std::size_t max_iters = 2000;
  /// Unset: 1 / L with L the power-iteration estimate of the normal map's top eigenvalue.
  std::optional<double> step_size;
  double convergence_tol = 1e-9;

  void validate() const;
};

struct LassoResult {
  SquareMatrix estimate;
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  double step_size = 0.0;
};

/// Minimizes (1/2n)|Y - X theta|^2 + lambda |theta|_* from theta = 0.
/// Non-convergence is reported in the result, not thrown.
LassoResult matrix_lasso(const Dataset& dataset, const EstimatorConfig& config);

/// Checks the trace is monotone up to rounding (1e-12 of the starting value).
bool objective_non_increasing(const LassoResult& result);

/// Singular values lambda_j -> max(lambda_j - t, 0), factors unchanged.
SquareMatrix soft_threshold_singular_values(const SquareMatrix& m, double t);

/// Largest eigenvalue of (1/n) X^* X by power iteration.
double sampling_lipschitz_constant(const Design& design, std::size_t iterations = 200);

struct ConfidenceBall {
  SquareMatrix center;
  double radius = 0.0;
  NormTag norm_tag = NormTag::frobenius;
  double alpha = 0.05;

  bool contains(const SquareMatrix& theta) const;
  double diameter() const { return 2.0 * radius; }
};

struct FrobeniusConfidenceSet {
  ConfidenceBall ball;
  /// R_hat^2 = mean squared held-out residual - 1.
  double squared_radius_estimate = 0.0;
  double z_alpha = 0.0;
  std::size_t estimation_size = 0;
  std::size_t assessment_size = 0;
  LassoResult fit;
};

/// (1/n2) sum_i (Y_i - tr(X^i center))^2 - 1 over the given observations.
double squared_radius_estimate(const Dataset& assessment, const SquareMatrix& center);

/// Empirical (1 - alpha) quantile of n2^{-1/2} sum_{i<=n2} (1 - eps_i^2), the lower
/// tail of the centred chi-square average. Always below sqrt(n2).
double centered_chi_square_quantile(std::size_t n2, double alpha, std::size_t replications,
                                    const RngStream& rng);

/// Sample-split ball: center fitted on the first ceil(n/2) observations and
/// radius^2 = (max(R_hat^2, 0) + s) / (1 - s), s = z(alpha)/sqrt(n2), from the rest.
/// Coverage is at least 1 - alpha for every theta, whatever the fit quality.
FrobeniusConfidenceSet frobenius_confidence_set(const Dataset& dataset, double alpha,
                                                const EstimatorConfig& config, double z_alpha);
FrobeniusConfidenceSet frobenius_confidence_set(const Dataset& dataset, double alpha,
                                                const EstimatorConfig& config, const RngStream& rng,
                                                std::size_t quantile_replications = 2000);

struct NuclearDiameterReport {
  /// 2 r sqrt(d): worst-case nuclear diameter of a Frobenius ball of radius r.
  double nuclear_diameter = 0.0;
  /// k0 sqrt(d/n), the nuclear estimation rate over R(k0).
  double adaptive_target = 0.0;
  /// sqrt(k1 d / n), the floor for sets honest over R(k1).
  double honest_floor = 0.0;
  double floor_to_target = 0.0;
  double diameter_to_target = 0.0;
  double diameter_to_floor = 0.0;
};

NuclearDiameterReport nuclear_diameter_report(const ConfidenceBall& ball, std::size_t k0,
                                              std::size_t k1, std::size_t n);

/// Nuclear radius of the ball: radius itself, or radius * sqrt(d) for a Frobenius ball.
double nuclear_radius(const ConfidenceBall& ball);

/// Test of H0: theta in R(k0): reject iff |center - R(k0)|_* > nuclear_radius + rho/2.
Decision confset_to_test(const ConfidenceBall& ball, std::size_t k0, double rho);

}  // namespace lowrank
