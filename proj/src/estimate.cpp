#include "lowrank/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lowrank {

namespace {

struct ProxResult {
  Eigen::MatrixXd matrix;
  double nuclear = 0.0;
};

ProxResult prox_nuclear(const Eigen::MatrixXd& m, double t) {
  Eigen::BDCSVD<Eigen::MatrixXd> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) throw NumericalFailure("SVD did not converge");
  const Eigen::VectorXd shrunk = (solver.singularValues().array() - t).max(0.0).matrix();
  return {solver.matrixU() * shrunk.asDiagonal() * solver.matrixV().transpose(), shrunk.sum()};
}

}  // namespace

void EstimatorConfig::validate() const {
  if (!(penalty_scale >= 0.0) || !std::isfinite(penalty_scale)) {
    throw InvalidArgument("penalty_scale must be non-negative");
  }
  if (max_iters == 0) throw InvalidArgument("max_iters must be at least 1");
  if (step_size && !(*step_size > 0.0)) throw InvalidArgument("step_size must be positive");
  if (!(convergence_tol > 0.0)) throw InvalidArgument("convergence_tol must be positive");
}

double sampling_lipschitz_constant(const Design& design, std::size_t iterations) {
  const auto& rows = design.rows();
  const double n = static_cast<double>(design.size());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(rows.cols()).normalized();
  double estimate = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    Eigen::VectorXd w = rows.transpose() * (rows * v) / n;
    const double next = v.dot(w);
    const double len = w.norm();
    if (len == 0.0) return 0.0;
    v = w / len;
    if (it > 0 && std::abs(next - estimate) <= 1e-6 * next) return next;
    estimate = next;
  }
  return estimate;
}

SquareMatrix soft_threshold_singular_values(const SquareMatrix& m, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("threshold must be non-negative");
  return SquareMatrix(prox_nuclear(m.values(), t).matrix);
}

LassoResult matrix_lasso(const Dataset& dataset, const EstimatorConfig& config) {
  config.validate();
  const auto& rows = dataset.design().rows();
  const Eigen::VectorXd& y = dataset.responses();
  const std::size_t d = dataset.dim();
  const auto dd = static_cast<Eigen::Index>(d);
  const double n = static_cast<double>(dataset.size());

  LassoResult result{SquareMatrix(d), {}, 0, false, 0.0, 0.0};
  result.lambda = config.penalty_scale * std::sqrt(static_cast<double>(d) / n);
  if (config.step_size) {
    result.step_size = *config.step_size;
  } else {
    // The Rayleigh quotient underestimates the top eigenvalue; keep a margin.
    const double lipschitz = 1.1 * sampling_lipschitz_constant(dataset.design(), 100);
    result.step_size = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;
  }

  // Iterate on phi = theta^T, whose column-major vectorization the design rows act on.
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(dd, dd);
  Eigen::VectorXd residual = y;
  const double initial = 0.5 * y.squaredNorm() / n;
  double objective = initial;
  result.objective_trace.push_back(objective);
  if (initial == 0.0) {
    result.converged = true;
    return result;
  }

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    const Eigen::VectorXd gradient = -(rows.transpose() * residual) / n;
    const Eigen::MatrixXd step =
        phi - result.step_size * Eigen::Map<const Eigen::MatrixXd>(gradient.data(), dd, dd);
    ProxResult next = prox_nuclear(step, result.step_size * result.lambda);
    phi = std::move(next.matrix);
    residual = y - rows * Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size());
    const double updated = 0.5 * residual.squaredNorm() / n + result.lambda * next.nuclear;
    result.objective_trace.push_back(updated);
    result.iterations = it + 1;
    const double decrease = objective - updated;
    objective = updated;
    if (decrease <= config.convergence_tol * updated + 1e-15 * initial) {
      result.converged = true;
      break;
    }
  }
  result.estimate = SquareMatrix(Eigen::MatrixXd(phi.transpose()));
  return result;
}

bool objective_non_increasing(const LassoResult& result) {
  const double scale = result.objective_trace.front();
  for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
    if (result.objective_trace[i] > result.objective_trace[i - 1] + 1e-12 * scale) return false;
  }
  return true;
}

bool ConfidenceBall::contains(const SquareMatrix& theta) const {
  return norm(theta - center, norm_tag) <= radius;
}

double squared_radius_estimate(const Dataset& assessment, const SquareMatrix& center) {
  const Eigen::VectorXd residual =
      assessment.responses() - apply_sampling(assessment.design(), center);
  return residual.squaredNorm() / static_cast<double>(assessment.size()) - 1.0;
}

double centered_chi_square_quantile(std::size_t n2, double alpha, std::size_t replications,
                                    const RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (n2 == 0 || replications == 0) throw InvalidArgument("sizes must be positive");
  std::vector<double> draws(replications);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n2));
  for (std::size_t b = 0; b < replications; ++b) {
    Sampler sampler(rng.child(b));
    double sum = 0.0;
    for (std::size_t i = 0; i < n2; ++i) {
      const double e = sampler.normal();
      sum += 1.0 - e * e;
    }
    draws[b] = scale * sum;
  }
  std::sort(draws.begin(), draws.end());
  const auto idx = static_cast<std::size_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(replications)));
  return draws[std::clamp<std::size_t>(idx, 1, replications) - 1];
}

FrobeniusConfidenceSet frobenius_confidence_set(const Dataset& dataset, double alpha,
                                                const EstimatorConfig& config, double z_alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const std::size_t n = dataset.size();
  if (n < 4) throw InvalidArgument("need n >= 4 to split the sample, got " + std::to_string(n));
  const std::size_t n1 = (n + 1) / 2;
  const std::size_t n2 = n - n1;
  LassoResult fit = matrix_lasso(dataset.slice(0, n1), config);
  const double r2 = squared_radius_estimate(dataset.slice(n1, n), fit.estimate);
  // R_hat^2 - |center - theta|^2 = (1 + |center - theta|^2) T / sqrt(n2) with T a centred
  // chi-square average, so -T <= z pins the squared error below the ratio.
  const double slack = z_alpha / std::sqrt(static_cast<double>(n2));
  if (!(slack < 1.0)) throw InvalidArgument("confidence quantile exceeds sqrt(n2)");
  const double radius = std::sqrt((std::max(r2, 0.0) + std::max(slack, 0.0)) / (1.0 - slack));
  return {ConfidenceBall{fit.estimate, radius, NormTag::frobenius, alpha}, r2, z_alpha, n1, n2,
          std::move(fit)};
}

FrobeniusConfidenceSet frobenius_confidence_set(const Dataset& dataset, double alpha,
                                                const EstimatorConfig& config, const RngStream& rng,
                                                std::size_t quantile_replications) {
  if (dataset.size() < 4) throw InvalidArgument("need n >= 4 to split the sample");
  const std::size_t n2 = dataset.size() - (dataset.size() + 1) / 2;
  const double z = centered_chi_square_quantile(n2, alpha, quantile_replications, rng);
  return frobenius_confidence_set(dataset, alpha, config, z);
}

NuclearDiameterReport nuclear_diameter_report(const ConfidenceBall& ball, std::size_t k0,
                                              std::size_t k1, std::size_t n) {
  if (ball.norm_tag != NormTag::frobenius) {
    throw InvalidArgument("nuclear diameter report expects a Frobenius ball");
  }
  if (k0 == 0 || k1 == 0 || n == 0) throw InvalidArgument("k0, k1 and n must be positive");
  const double d = static_cast<double>(ball.center.dim());
  const double nn = static_cast<double>(n);
  NuclearDiameterReport r;
  r.nuclear_diameter = 2.0 * ball.radius * std::sqrt(d);
  r.adaptive_target = static_cast<double>(k0) * std::sqrt(d / nn);
  r.honest_floor = std::sqrt(static_cast<double>(k1) * d / nn);
  r.floor_to_target = r.honest_floor / r.adaptive_target;
  r.diameter_to_target = r.nuclear_diameter / r.adaptive_target;
  r.diameter_to_floor = r.nuclear_diameter / r.honest_floor;
  return r;
}

double nuclear_radius(const ConfidenceBall& ball) {
  if (ball.norm_tag == NormTag::nuclear) return ball.radius;
  return ball.radius * std::sqrt(static_cast<double>(ball.center.dim()));
}

Decision confset_to_test(const ConfidenceBall& ball, std::size_t k0, double rho) {
  if (k0 > ball.center.dim()) throw InvalidArgument("k0 exceeds the matrix dimension");
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  const double distance = nuclear_distance_to_rank(ball.center, k0);
  return distance > nuclear_radius(ball) + 0.5 * rho ? Decision::reject : Decision::accept;
}

}  // namespace lowrank
