#include "lowrank/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lowrank {

namespace {

void require_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw InvalidArgument("matrix has non-finite entries");
}

void require_same_dim(const SquareMatrix& a, const SquareMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
  }
}

void require_rank_in_range(const SquareMatrix& m, std::size_t k0) {
  if (k0 > m.dim()) {
    throw InvalidArgument("rank " + std::to_string(k0) + " outside [0, " +
                          std::to_string(m.dim()) + "]");
  }
}

}  // namespace

SquareMatrix::SquareMatrix(std::size_t dim) {
  if (dim == 0) throw InvalidArgument("matrix dimension must be at least 1");
  const auto d = static_cast<Eigen::Index>(dim);
  values_ = Eigen::MatrixXd::Zero(d, d);
}

SquareMatrix::SquareMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() == 0) throw InvalidArgument("matrix dimension must be at least 1");
  if (values_.rows() != values_.cols()) {
    throw InvalidArgument("matrix is not square: " + std::to_string(values_.rows()) + "x" +
                          std::to_string(values_.cols()));
  }
  require_finite(values_);
}

SquareMatrix SquareMatrix::identity(std::size_t dim) {
  SquareMatrix m(dim);
  m.values_.setIdentity();
  return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> entries) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) v(static_cast<Eigen::Index>(i)) = entries[i];
  return SquareMatrix(Eigen::MatrixXd(v.asDiagonal()));
}

SquareMatrix operator+(const SquareMatrix& a, const SquareMatrix& b) {
  require_same_dim(a, b);
  return SquareMatrix(Eigen::MatrixXd(a.values_ + b.values_));
}

SquareMatrix operator-(const SquareMatrix& a, const SquareMatrix& b) {
  require_same_dim(a, b);
  return SquareMatrix(Eigen::MatrixXd(a.values_ - b.values_));
}

SquareMatrix operator*(double s, const SquareMatrix& a) {
  return SquareMatrix(Eigen::MatrixXd(s * a.values_));
}

SvdResult svd(const SquareMatrix& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> solver(m.values(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) throw NumericalFailure("SVD did not converge");
  return {solver.singularValues(), solver.matrixU(), solver.matrixV()};
}

Eigen::VectorXd singular_values(const SquareMatrix& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> solver(m.values());
  if (solver.info() != Eigen::Success) throw NumericalFailure("SVD did not converge");
  return solver.singularValues();
}

double frobenius_norm(const SquareMatrix& m) { return m.values().norm(); }

double frobenius_inner(const SquareMatrix& u, const SquareMatrix& v) {
  require_same_dim(u, v);
  return u.values().cwiseProduct(v.values()).sum();
}

double nuclear_norm(const SquareMatrix& m) { return singular_values(m).sum(); }

double norm(const SquareMatrix& m, NormTag tag) {
  return tag == NormTag::frobenius ? frobenius_norm(m) : nuclear_norm(m);
}

std::size_t numerical_rank(const SquareMatrix& m, double tol) {
  if (tol < 0.0) throw InvalidArgument("rank tolerance must be non-negative");
  const Eigen::VectorXd s = singular_values(m);
  const double top = s(0);
  if (top == 0.0) return 0;
  return static_cast<std::size_t>((s.array() > tol * top).count());
}

double nuclear_distance_to_rank(const SquareMatrix& m, std::size_t k0) {
  require_rank_in_range(m, k0);
  const Eigen::VectorXd s = singular_values(m);
  return s.tail(s.size() - static_cast<Eigen::Index>(k0)).sum();
}

SquareMatrix truncate_to_rank(const SquareMatrix& m, std::size_t k0) {
  require_rank_in_range(m, k0);
  if (k0 == 0) return SquareMatrix(m.dim());
  const SvdResult f = svd(m);
  const auto k = static_cast<Eigen::Index>(k0);
  Eigen::MatrixXd out = f.left_factors.leftCols(k) * f.singular_values.head(k).asDiagonal() *
                        f.right_factors.leftCols(k).transpose();
  return SquareMatrix(std::move(out));
}

}  // namespace lowrank
