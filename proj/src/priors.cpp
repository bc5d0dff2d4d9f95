#include "lowrank/priors.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "lowrank/trace_model.hpp"

namespace lowrank {

BlockRademacherPrior::BlockRademacherPrior(std::size_t d, std::size_t k, double gamma)
    : d_(d), gamma_(gamma) {
  if (d == 0) throw InvalidArgument("prior dimension must be at least 1");
  if (k == 0 || k > d) throw InvalidArgument("rank budget k must satisfy 1 <= k <= d");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
  const std::size_t width = d / k;
  block_sizes_.assign(k, width);
  block_sizes_.back() = d - width * (k - 1);
}

SquareMatrix BlockRademacherPrior::assemble(const std::vector<Eigen::VectorXd>& directions,
                                            const Eigen::VectorXd& column_signs) const {
  if (directions.size() != rank_budget() ||
      static_cast<std::size_t>(column_signs.size()) != d_) {
    throw InvalidArgument("sign layout does not match prior");
  }
  const auto d = static_cast<Eigen::Index>(d_);
  Eigen::MatrixXd w(d, d);
  Eigen::Index col = 0;
  for (std::size_t l = 0; l < block_sizes_.size(); ++l) {
    if (directions[l].size() != d) throw InvalidArgument("direction vector has wrong length");
    for (std::size_t j = 0; j < block_sizes_[l]; ++j, ++col) {
      w.col(col) = gamma_ * column_signs(col) * directions[l];
    }
  }
  return SquareMatrix(std::move(w));
}

DiscretePrior::DiscretePrior(std::vector<SquareMatrix> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw InvalidArgument("prior needs at least one atom");
  if (atoms_.size() != weights_.size()) throw InvalidArgument("atoms and weights differ in length");
  const std::size_t d = atoms_.front().dim();
  double total = 0.0;
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    if (atoms_[a].dim() != d) throw InvalidArgument("prior atoms differ in dimension");
    if (!(weights_[a] >= 0.0)) throw InvalidArgument("prior weights must be non-negative");
    total += weights_[a];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("prior weights sum to " + std::to_string(total) + ", not 1");
  }
}

DiscretePrior DiscretePrior::point_mass(const SquareMatrix& atom) {
  return DiscretePrior({atom}, {1.0});
}

DiscretePrior DiscretePrior::uniform(std::vector<SquareMatrix> atoms) {
  const std::size_t count = atoms.size();
  if (count == 0) throw InvalidArgument("prior needs at least one atom");
  std::vector<double> w(count, 1.0 / static_cast<double>(count));
  // Absorb rounding so the weights sum to one within 1e-12 even for large counts.
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  w.front() += 1.0 - total;
  return DiscretePrior(std::move(atoms), std::move(w));
}

Eigen::MatrixXd DiscretePrior::coefficient_matrix() const {
  const auto d2 = static_cast<Eigen::Index>(dim() * dim());
  Eigen::MatrixXd c(d2, static_cast<Eigen::Index>(size()));
  for (std::size_t a = 0; a < size(); ++a) {
    c.col(static_cast<Eigen::Index>(a)) = sampling_coefficients(atoms_[a]);
  }
  return c;
}

double gamma_for_separation(NormTag tag, double rho, std::size_t d, std::size_t k) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be positive");
  if (d == 0 || k == 0 || k > d) throw InvalidArgument("need 1 <= k <= d");
  const double dd = static_cast<double>(d);
  if (tag == NormTag::frobenius) return rho / dd;
  return 2.0 * rho / (std::sqrt(static_cast<double>(k)) * dd);
}

BlockDraw draw_block_rademacher_with_signs(const BlockRademacherPrior& prior, Sampler& sampler) {
  const auto d = static_cast<Eigen::Index>(prior.dim());
  std::vector<Eigen::VectorXd> directions;
  directions.reserve(prior.rank_budget());
  Eigen::VectorXd column_signs(d);
  Eigen::Index col = 0;
  for (std::size_t l = 0; l < prior.rank_budget(); ++l) {
    Eigen::VectorXd v(d);
    for (Eigen::Index m = 0; m < d; ++m) v(m) = sampler.sign();
    directions.push_back(std::move(v));
    for (std::size_t j = 0; j < prior.block_sizes()[l]; ++j) column_signs(col++) = sampler.sign();
  }
  SquareMatrix theta = prior.assemble(directions, column_signs);
  return {std::move(theta), std::move(directions), std::move(column_signs)};
}

SquareMatrix draw_block_rademacher(const BlockRademacherPrior& prior, Sampler& sampler) {
  return draw_block_rademacher_with_signs(prior, sampler).theta;
}

SquareMatrix draw_block_rademacher(const BlockRademacherPrior& prior, const RngStream& rng) {
  Sampler sampler(rng);
  return draw_block_rademacher(prior, sampler);
}

DiscretePrior enumerate_prior(const BlockRademacherPrior& prior) {
  const std::size_t bits = prior.sign_bits();
  if (bits > 20) {
    throw GuardViolation("enumeration budget: 2^" + std::to_string(bits) +
                         " atoms exceeds 2^20");
  }
  const std::size_t count = std::size_t{1} << bits;
  const std::size_t d = prior.dim();
  const std::size_t k = prior.rank_budget();
  std::vector<SquareMatrix> atoms;
  atoms.reserve(count);
  std::vector<Eigen::VectorXd> directions(k, Eigen::VectorXd(static_cast<Eigen::Index>(d)));
  Eigen::VectorXd column_signs(static_cast<Eigen::Index>(d));
  auto sign_of = [](std::size_t mask, std::size_t bit) {
    return ((mask >> bit) & 1U) != 0 ? -1.0 : 1.0;
  };
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::size_t bit = 0;
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t m = 0; m < d; ++m) directions[l](static_cast<Eigen::Index>(m)) = sign_of(mask, bit++);
    }
    for (std::size_t j = 0; j < d; ++j) column_signs(static_cast<Eigen::Index>(j)) = sign_of(mask, bit++);
    atoms.push_back(prior.assemble(directions, column_signs));
  }
  return DiscretePrior::uniform(std::move(atoms));
}

DiscretePrior enumerate_prior(std::size_t d, std::size_t k, double gamma) {
  return enumerate_prior(BlockRademacherPrior(d, k, gamma));
}

Eigen::MatrixXd scaled_direction_matrix(const std::vector<Eigen::VectorXd>& directions) {
  if (directions.empty()) throw InvalidArgument("no direction vectors");
  const Eigen::Index d = directions.front().size();
  Eigen::MatrixXd v(d, static_cast<Eigen::Index>(directions.size()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t l = 0; l < directions.size(); ++l) {
    v.col(static_cast<Eigen::Index>(l)) = scale * directions[l];
  }
  return v;
}

Eigen::MatrixXd random_orthonormal_frame(std::size_t d, std::size_t k, Sampler& sampler) {
  if (k == 0 || k > d) throw InvalidArgument("frame needs 1 <= k <= d");
  const auto rows = static_cast<Eigen::Index>(d);
  const auto cols = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd g(rows, cols);
  sampler.fill_normal(std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

SquareMatrix draw_random_low_rank(std::size_t d, std::size_t k, double target_norm, NormTag tag,
                                  const RngStream& rng, Spectrum spectrum) {
  if (k == 0 || k > d) throw InvalidArgument("need 1 <= k <= d");
  if (!(target_norm > 0.0) || !std::isfinite(target_norm)) {
    throw InvalidArgument("target norm must be positive");
  }
  Sampler sampler(rng);
  const Eigen::MatrixXd u = random_orthonormal_frame(d, k, sampler);
  const Eigen::MatrixXd v = random_orthonormal_frame(d, k, sampler);
  Eigen::VectorXd sigma = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k));
  if (spectrum == Spectrum::random) {
    for (Eigen::Index l = 0; l < sigma.size(); ++l) sigma(l) = 0.5 + sampler.uniform();
  }
  const double current = tag == NormTag::frobenius ? sigma.norm() : sigma.sum();
  sigma *= target_norm / current;
  return SquareMatrix(Eigen::MatrixXd(u * sigma.asDiagonal() * v.transpose()));
}

SquareMatrix draw_quantum_state(std::size_t d, std::size_t k, const RngStream& rng) {
  if (k == 0 || k > d) throw InvalidArgument("need 1 <= k <= d");
  Sampler sampler(rng);
  const Eigen::MatrixXd u = random_orthonormal_frame(d, k, sampler);
  Eigen::VectorXd p(static_cast<Eigen::Index>(k));
  for (Eigen::Index l = 0; l < p.size(); ++l) p(l) = sampler.exponential();
  p /= p.sum();
  Eigen::MatrixXd rho = u * p.asDiagonal() * u.transpose();
  rho = 0.5 * (rho + rho.transpose()).eval();
  return SquareMatrix(std::move(rho));
}

}  // namespace lowrank
