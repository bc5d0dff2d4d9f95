#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "lowrank/detect.hpp"
#include "lowrank/priors.hpp"
#include "lowrank/trace_model.hpp"

namespace lowrank {

/// Atom-pair enumeration limit for the exact conditional second moment.
inline constexpr std::size_t kMaxPairAtoms = 1024;

/// Grid used when optimizing the testing lower bound over eta.
inline constexpr std::size_t kEtaGridPoints = 512;

/// Monte Carlo moments of the averaged likelihood ratio Z under the null.
struct ChiSquareReport {
  double mean_z = 0.0;
  double mean_z_std_error = 0.0;
  double mean_z_squared = 0.0;
  double mean_z_squared_std_error = 0.0;
  /// E0[Z^2] - 1; absent when mean_z fails the 3-standard-error sanity gate.
  std::optional<double> chi_square;
  std::size_t replications = 0;
  std::size_t enumeration_size = 0;

  bool sanity_ok() const { return chi_square.has_value(); }
};

/// log Z for Z = sum_a w_a exp(loglik_ratio_vs_null(data, theta_a)), max-shifted.
double log_averaged_likelihood_ratio(const Dataset& dataset, const DiscretePrior& prior);
double averaged_likelihood_ratio(const Dataset& dataset, const DiscretePrior& prior);

/// E0[Z^2] over `reps` independent null (design, noise) draws.
ChiSquareReport chi_square_divergence(const DiscretePrior& prior, std::size_t n, std::size_t reps,
                                      const RngStream& rng, std::size_t threads = 1);

struct SecondMomentCheck {
  double monte_carlo_value = 0.0;
  double monte_carlo_std_error = 0.0;
  double exact_value = 0.0;
  double relative_gap = 0.0;
};

/// E0[Z^2 | design] two ways: average of Z^2 over y_reps noise draws, and
/// the pair sum E_{pi^2} exp(<X theta, X theta'>).
SecondMomentCheck conditional_second_moment_check(const Design& design, const DiscretePrior& prior,
                                                  std::size_t y_reps, const RngStream& rng,
                                                  std::size_t threads = 1);

/// The pair-sum side of conditional_second_moment_check on its own.
double conditional_second_moment_exact(const Design& design, const DiscretePrior& prior);

/// E0[Z^2] for the block prior with design and noise both integrated out.
///
/// Given theta, theta' the pairs ((X theta)_i, (X theta')_i) are i.i.d.
/// centred normals with variances |theta|^2, |theta'|^2 and covariance
/// <theta, theta'>, so E exp(<X theta, X theta'>) = ((1-c)^2 - s^4)^{-n/2}.
/// The law of c = gamma^2 sum_l S_l T_l is a convolution of Rademacher sums.
/// Returns +inf when the moment generating function diverges.
double block_prior_second_moment(const BlockRademacherPrior& prior, std::size_t n);

/// max over the eta grid of (1-eta)(1 - sqrt(chi_square)/eta), clamped to [0,1].
/// chi_square == 0 returns the supremum 1.
double minimax_error_lower_bound(double chi_square);

struct CertificateRequest {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 1;
  NormTag norm_tag = NormTag::frobenius;
  double rho = 0.0;
  std::size_t reps = 10000;
  double alpha = 0.05;
  std::size_t calibration_reps = 2000;
  /// Replications for the detect cross-check (size and prior-averaged miss).
  std::size_t detect_reps = 2000;
  /// When set, also measure membership in the composite alternative
  /// |theta - R(k0)|_* >= rho.
  std::optional<std::size_t> composite_k0;
  /// Draws used to estimate H1 membership when the prior is not enumerable.
  std::size_t membership_draws = 2000;
};

struct Certificate {
  bool in_certified_regime = false;
  double gamma = 0.0;
  /// "monte_carlo" (enumerated prior) or "closed_form" (not enumerable).
  std::string chi_square_method;
  std::size_t enumeration_size = 0;
  std::optional<ChiSquareReport> report;
  double chi_square = 0.0;
  double chi_square_std_error = 0.0;
  /// Exact E0[Z^2] - 1 from block_prior_second_moment, when affordable.
  std::optional<double> closed_form_chi_square;
  double lower_bound = 0.0;
  /// Fraction of prior mass with |theta| >= rho in the request's norm.
  double h1_fraction = 0.0;
  /// Fraction with |theta - R(k0)|_* >= rho, when composite_k0 is set.
  std::optional<double> composite_h1_fraction;
  std::size_t h1_checked = 0;
  bool h1_exact = false;
  RejectionRate detect_size;
  RejectionRate detect_miss;
  double detect_total_error = 0.0;
  double detect_total_error_std_error = 0.0;
};

/// Lower-bound certificate for H0: theta = 0 vs the block prior at separation rho,
/// with the detect test's empirical size + prior-averaged miss as a cross-check.
Certificate certify_no_test(const CertificateRequest& request, const RngStream& rng,
                            std::size_t threads = 1);

}  // namespace lowrank
