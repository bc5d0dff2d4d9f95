#include "lowrank/trace_model.hpp"

#include <string>

namespace lowrank {

namespace {

void require_compatible(const Design& design, const SquareMatrix& theta) {
  if (design.dim() != theta.dim()) {
    throw InvalidArgument("design dimension " + std::to_string(design.dim()) +
                          " does not match parameter dimension " + std::to_string(theta.dim()));
  }
}

}  // namespace

Design::Design(std::size_t dim, DesignRows rows) : dim_(dim), rows_(std::move(rows)) {
  if (dim_ == 0) throw InvalidArgument("design dimension must be at least 1");
  if (rows_.rows() == 0) throw InvalidArgument("design needs at least one observation");
  if (static_cast<std::size_t>(rows_.cols()) != dim_ * dim_) {
    throw InvalidArgument("design rows must have d^2 = " + std::to_string(dim_ * dim_) +
                          " entries, got " + std::to_string(rows_.cols()));
  }
}

Design Design::from_matrices(std::span<const SquareMatrix> matrices) {
  if (matrices.empty()) throw InvalidArgument("design needs at least one observation");
  const std::size_t d = matrices.front().dim();
  check_design_budget(matrices.size(), d);
  DesignRows rows(static_cast<Eigen::Index>(matrices.size()), static_cast<Eigen::Index>(d * d));
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    if (matrices[i].dim() != d) throw InvalidArgument("design matrices differ in dimension");
    rows.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(matrices[i].values().data(),
                                             static_cast<Eigen::Index>(d * d));
  }
  return Design(d, std::move(rows));
}

SquareMatrix Design::matrix(std::size_t i) const {
  if (i >= size()) throw InvalidArgument("design index out of range");
  const auto d = static_cast<Eigen::Index>(dim_);
  return SquareMatrix(Eigen::MatrixXd(
      Eigen::Map<const Eigen::MatrixXd>(rows_.row(static_cast<Eigen::Index>(i)).data(), d, d)));
}

Dataset::Dataset(Design design, Eigen::VectorXd responses, std::optional<SquareMatrix> truth)
    : design_(std::move(design)), responses_(std::move(responses)), truth_(std::move(truth)) {
  if (static_cast<std::size_t>(responses_.size()) != design_.size()) {
    throw InvalidArgument("responses length " + std::to_string(responses_.size()) +
                          " does not match design length " + std::to_string(design_.size()));
  }
  if (truth_ && truth_->dim() != design_.dim()) {
    throw InvalidArgument("truth dimension does not match design");
  }
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > size()) throw InvalidArgument("invalid dataset slice");
  const auto b = static_cast<Eigen::Index>(begin);
  const auto len = static_cast<Eigen::Index>(end - begin);
  return Dataset(Design(dim(), DesignRows(design_.rows().middleRows(b, len))),
                 Eigen::VectorXd(responses_.segment(b, len)), truth_);
}

Eigen::VectorXd sampling_coefficients(const SquareMatrix& theta) {
  const Eigen::MatrixXd t = theta.values().transpose();
  return Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
}

void check_design_budget(std::size_t n, std::size_t d) {
  const auto entries = static_cast<unsigned __int128>(n) * d * d;
  if (entries > kMaxDesignEntries) {
    throw GuardViolation("design budget: n*d^2 = " + std::to_string(static_cast<double>(entries)) +
                         " exceeds 2^28 entries");
  }
}

Eigen::VectorXd apply_sampling(const Design& design, const SquareMatrix& theta) {
  require_compatible(design, theta);
  return design.rows() * sampling_coefficients(theta);
}

Design draw_design(std::size_t n, std::size_t d, Sampler& sampler) {
  if (n == 0 || d == 0) throw InvalidArgument("n and d must be positive");
  check_design_budget(n, d);
  DesignRows rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d * d));
  sampler.fill_normal(std::span<double>(rows.data(), static_cast<std::size_t>(rows.size())));
  return Design(d, std::move(rows));
}

Dataset generate_dataset(std::size_t n, std::size_t d, const SquareMatrix& theta,
                         const RngStream& rng) {
  if (theta.dim() != d) throw InvalidArgument("parameter dimension does not match d");
  Sampler sampler(rng);
  Design design = draw_design(n, d, sampler);
  Eigen::VectorXd noise(static_cast<Eigen::Index>(n));
  sampler.fill_normal(std::span<double>(noise.data(), n));
  Eigen::VectorXd y = design.rows() * sampling_coefficients(theta) + noise;
  return Dataset(std::move(design), std::move(y), theta);
}

double loglik_ratio_vs_null(const Dataset& dataset, const SquareMatrix& theta) {
  const Eigen::VectorXd mean = apply_sampling(dataset.design(), theta);
  return dataset.responses().dot(mean) - 0.5 * mean.squaredNorm();
}

}  // namespace lowrank
