#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "lowrank/matrix_core.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

/// Largest atom count enumerate_prior will materialize.
inline constexpr std::size_t kMaxEnumeratedAtoms = std::size_t{1} << 20;

/// The block-Rademacher prior: theta = gamma * W where column j of block l is
/// B_{l,j} * v_l, with v_l in {+-1}^d and B_{l,j} in {+-1} uniform.
///
/// Every draw has rank <= k, entries in {-gamma, +gamma} and Frobenius norm
/// exactly gamma * d.
class BlockRademacherPrior {
 public:
  /// Blocks 1..k-1 get floor(d/k) columns, block k takes the remainder.
  BlockRademacherPrior(std::size_t d, std::size_t k, double gamma);

  std::size_t dim() const { return d_; }
  std::size_t rank_budget() const { return block_sizes_.size(); }
  double gamma() const { return gamma_; }
  const std::vector<std::size_t>& block_sizes() const { return block_sizes_; }

  /// Number of sign bits in one draw: k*d direction signs plus d column signs.
  std::size_t sign_bits() const { return d_ * rank_budget() + d_; }

  /// Build the matrix for explicit signs (directions[l] has d entries,
  /// column_signs has d entries laid out block after block).
  SquareMatrix assemble(const std::vector<Eigen::VectorXd>& directions,
                        const Eigen::VectorXd& column_signs) const;

 private:
  std::size_t d_;
  double gamma_;
  std::vector<std::size_t> block_sizes_;
};

/// Finitely supported probability measure on d x d matrices.
class DiscretePrior {
 public:
  DiscretePrior(std::vector<SquareMatrix> atoms, std::vector<double> weights);

  static DiscretePrior point_mass(const SquareMatrix& atom);
  static DiscretePrior uniform(std::vector<SquareMatrix> atoms);

  std::size_t size() const { return atoms_.size(); }
  std::size_t dim() const { return atoms_.front().dim(); }
  const std::vector<SquareMatrix>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  /// d^2 x A matrix whose column a is sampling_coefficients(atom a).
  Eigen::MatrixXd coefficient_matrix() const;

 private:
  std::vector<SquareMatrix> atoms_;
  std::vector<double> weights_;
};

/// gamma_n for the block prior: rho/d (Frobenius) or 2 rho/(sqrt(k) d) (nuclear).
double gamma_for_separation(NormTag tag, double rho, std::size_t d, std::size_t k);

/// Signs are drawn block by block: v_l (d signs) then B_{l,.}.
SquareMatrix draw_block_rademacher(const BlockRademacherPrior& prior, const RngStream& rng);
SquareMatrix draw_block_rademacher(const BlockRademacherPrior& prior, Sampler& sampler);

/// Exact uniform law over all 2^(kd + d) sign patterns, duplicates kept.
DiscretePrior enumerate_prior(std::size_t d, std::size_t k, double gamma);
DiscretePrior enumerate_prior(const BlockRademacherPrior& prior);

/// The d x k matrix with columns v_l / sqrt(d) underlying a block draw.
Eigen::MatrixXd scaled_direction_matrix(const std::vector<Eigen::VectorXd>& directions);

/// One block draw together with the sign vectors that produced it.
struct BlockDraw {
  SquareMatrix theta;
  std::vector<Eigen::VectorXd> directions;
  Eigen::VectorXd column_signs;
};
BlockDraw draw_block_rademacher_with_signs(const BlockRademacherPrior& prior, Sampler& sampler);

enum class Spectrum { flat, random };

/// sum_l sigma_l u_l v_l^T with Haar-like orthonormal factors, rescaled so
/// the selected norm equals target_norm. Flat spectrum uses equal sigma_l.
SquareMatrix draw_random_low_rank(std::size_t d, std::size_t k, double target_norm, NormTag tag,
                                  const RngStream& rng, Spectrum spectrum = Spectrum::flat);

/// U diag(p) U^T with U a random d x k orthonormal frame and p uniform on the simplex.
SquareMatrix draw_quantum_state(std::size_t d, std::size_t k, const RngStream& rng);

/// d x k matrix with orthonormal columns (QR of a Gaussian matrix, sign-fixed).
Eigen::MatrixXd random_orthonormal_frame(std::size_t d, std::size_t k, Sampler& sampler);

}  // namespace lowrank
