#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "lowrank/common.hpp"

namespace lowrank {

/// Relative singular-value cutoff used by numerical_rank.
inline constexpr double kDefaultRankTolerance = 1e-8;

/// A d x d real matrix with finite entries and d >= 1.
///
/// Thin value wrapper over an Eigen matrix. Every constructor validates the
/// invariants, so any SquareMatrix in circulation is square and finite.
class SquareMatrix {
 public:
  /// Zero matrix of the given dimension.
  explicit SquareMatrix(std::size_t dim);
  explicit SquareMatrix(Eigen::MatrixXd values);

  static SquareMatrix zero(std::size_t dim) { return SquareMatrix(dim); }
  static SquareMatrix identity(std::size_t dim);
  static SquareMatrix diagonal(std::span<const double> entries);

  std::size_t dim() const { return static_cast<std::size_t>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(std::size_t row, std::size_t col) const {
    return values_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }

  SquareMatrix transposed() const { return SquareMatrix(Eigen::MatrixXd(values_.transpose())); }

  friend SquareMatrix operator+(const SquareMatrix& a, const SquareMatrix& b);
  friend SquareMatrix operator-(const SquareMatrix& a, const SquareMatrix& b);
  friend SquareMatrix operator*(double s, const SquareMatrix& a);
  friend SquareMatrix operator*(const SquareMatrix& a, double s) { return s * a; }

 private:
  Eigen::MatrixXd values_;
};

/// M = left * diag(singular_values) * right^T, singular values non-increasing.
struct SvdResult {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd left_factors;
  Eigen::MatrixXd right_factors;
};

SvdResult svd(const SquareMatrix& m);

/// Singular values only, non-increasing.
Eigen::VectorXd singular_values(const SquareMatrix& m);

double frobenius_norm(const SquareMatrix& m);
double frobenius_inner(const SquareMatrix& u, const SquareMatrix& v);
double nuclear_norm(const SquareMatrix& m);
double norm(const SquareMatrix& m, NormTag tag);

/// Number of singular values strictly above tol * sigma_max; 0 for the zero matrix.
std::size_t numerical_rank(const SquareMatrix& m, double tol = kDefaultRankTolerance);

/// Nuclear-norm distance from m to the set of matrices of rank <= k0.
///
/// Equals the sum of the singular values beyond the k0 largest, which is the
/// exact infimum for any unitarily invariant norm (Mirsky).
double nuclear_distance_to_rank(const SquareMatrix& m, std::size_t k0);

/// Best rank-k0 approximation: truncated SVD keeping the k0 largest values.
SquareMatrix truncate_to_rank(const SquareMatrix& m, std::size_t k0);

}  // namespace lowrank
