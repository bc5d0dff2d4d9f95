#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lowrank/matrix_core.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

/// Refuse datasets whose design would hold more than this many entries.
inline constexpr std::uint64_t kMaxDesignEntries = std::uint64_t{1} << 28;

using DesignRows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// The n design matrices X^1..X^n of one realization, all d x d.
///
/// Stored as an n x d^2 row-major block whose row i is X^i flattened in
/// column-major order. With that layout the sampling operator is a single
/// matrix-vector product against sampling_coefficients(theta).
class Design {
 public:
  Design(std::size_t dim, DesignRows rows);

  static Design from_matrices(std::span<const SquareMatrix> matrices);

  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const { return dim_; }
  const DesignRows& rows() const { return rows_; }
  SquareMatrix matrix(std::size_t i) const;

 private:
  std::size_t dim_;
  DesignRows rows_;
};

/// One realization Y = X(theta) + eps of the trace regression model.
class Dataset {
 public:
  Dataset(Design design, Eigen::VectorXd responses,
          std::optional<SquareMatrix> truth = std::nullopt);

  std::size_t size() const { return design_.size(); }
  std::size_t dim() const { return design_.dim(); }
  const Design& design() const { return design_; }
  const Eigen::VectorXd& responses() const { return responses_; }
  const std::optional<SquareMatrix>& truth() const { return truth_; }

  /// Observations [begin, end) as a dataset of their own.
  Dataset slice(std::size_t begin, std::size_t end) const;

 private:
  Design design_;
  Eigen::VectorXd responses_;
  std::optional<SquareMatrix> truth_;
};

/// Coefficient vector c with rows() * c == X(theta): vec(theta^T), column-major.
Eigen::VectorXd sampling_coefficients(const SquareMatrix& theta);

/// Throws GuardViolation when n * d^2 exceeds kMaxDesignEntries.
void check_design_budget(std::size_t n, std::size_t d);

/// (tr(X^1 theta), ..., tr(X^n theta)).
Eigen::VectorXd apply_sampling(const Design& design, const SquareMatrix& theta);

/// n design matrices with i.i.d. N(0,1) entries.
Design draw_design(std::size_t n, std::size_t d, Sampler& sampler);

/// Design first (observation-major), then the noise vector, from one stream.
Dataset generate_dataset(std::size_t n, std::size_t d, const SquareMatrix& theta,
                         const RngStream& rng);

/// log prod_i dP_i^theta / dP_i^0 given the design: <Y, X theta> - |X theta|^2 / 2.
double loglik_ratio_vs_null(const Dataset& dataset, const SquareMatrix& theta);

}  // namespace lowrank
