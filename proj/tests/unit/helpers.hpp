#pragma once

#include <Eigen/Dense>

#include "lowrank/matrix_core.hpp"
#include "lowrank/rng.hpp"

namespace testing {

inline lowrank::SquareMatrix gaussian_matrix(std::size_t d, lowrank::Sampler& s) {
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = s.normal();
  return lowrank::SquareMatrix(m);
}

inline Eigen::MatrixXd orthogonal_matrix(std::size_t d, lowrank::Sampler& s) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(d, s).values());
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

inline Eigen::VectorXd unit_vector(std::size_t d, lowrank::Sampler& s) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = s.normal();
  return v.normalized();
}

// Sample mean and its standard error.
struct MeanSe {
  double mean = 0, se = 0, sd = 0;
};

template <class Range>
MeanSe mean_se(const Range& values) {
  double sum = 0, sq = 0, n = 0;
  for (double v : values) {
    sum += v;
    n += 1;
  }
  const double mean = sum / n;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / (n - 1));
  return {mean, sd / std::sqrt(n), sd};
}

}  // namespace testing
