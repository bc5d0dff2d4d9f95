#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "lowrank/matrix_core.hpp"

using namespace lowrank;

namespace {

SquareMatrix diag(std::vector<double> v) { return SquareMatrix::diagonal(v); }

}  // namespace

TEST_CASE("square matrix rejects bad input") {
  CHECK_THROWS_AS(SquareMatrix(0), InvalidArgument);
  CHECK_THROWS_AS(SquareMatrix(Eigen::MatrixXd(2, 3)), InvalidArgument);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 1) = std::nan("");
  CHECK_THROWS_AS(SquareMatrix{m}, InvalidArgument);
  m(0, 1) = INFINITY;
  CHECK_THROWS_AS(SquareMatrix{m}, InvalidArgument);
}

TEST_CASE("frobenius norm") {
  CHECK(frobenius_norm(diag({3, 4})) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(frobenius_norm(SquareMatrix::identity(3)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  Sampler s(RngStream(11));
  for (int r = 0; r < 20; ++r) {
    const SquareMatrix m = testing::gaussian_matrix(7, s);
    const double ref = std::sqrt((m.values().transpose() * m.values()).trace());
    CHECK(std::abs(frobenius_norm(m) - ref) <= 1e-12 * ref);
    const Eigen::VectorXd sv = singular_values(m);
    CHECK(std::abs(frobenius_norm(m) - sv.norm()) <= 1e-12 * ref);
  }
}

TEST_CASE("frobenius inner product") {
  Sampler s(RngStream(12));
  const SquareMatrix m = testing::gaussian_matrix(5, s);
  CHECK(frobenius_inner(m, m) == doctest::Approx(std::pow(frobenius_norm(m), 2)).epsilon(1e-13));
  CHECK(frobenius_inner(SquareMatrix::identity(2), diag({2.5, -7})) == doctest::Approx(-4.5));
  for (int r = 0; r < 10; ++r) {
    const SquareMatrix u = testing::gaussian_matrix(6, s), v = testing::gaussian_matrix(6, s);
    CHECK(std::abs(frobenius_inner(u, v) - frobenius_inner(v, u)) <= 1e-12);
  }
  CHECK_THROWS_AS(frobenius_inner(SquareMatrix(2), SquareMatrix(3)), InvalidArgument);
}

TEST_CASE("nuclear norm") {
  CHECK(nuclear_norm(SquareMatrix::identity(3)) == doctest::Approx(3.0));
  Sampler s(RngStream(13));
  const Eigen::VectorXd u = testing::unit_vector(6, s), v = testing::unit_vector(6, s);
  CHECK(nuclear_norm(SquareMatrix(Eigen::MatrixXd(u * v.transpose()))) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nuclear_norm(diag({3, -2, 1})) == doctest::Approx(6.0));
  CHECK(norm(diag({3, -2, 1}), NormTag::nuclear) == doctest::Approx(6.0));
  CHECK(norm(diag({3, 4}), NormTag::frobenius) == doctest::Approx(5.0));
}

TEST_CASE("svd invariants") {
  Sampler s(RngStream(14));
  for (std::size_t d : {1, 2, 5, 20, 64}) {
    const SquareMatrix m = testing::gaussian_matrix(d, s);
    const SvdResult r = svd(m);
    const double scale = frobenius_norm(m);
    for (Eigen::Index j = 0; j < r.singular_values.size(); ++j) {
      CHECK(r.singular_values(j) >= 0.0);
      if (j > 0) CHECK(r.singular_values(j) <= r.singular_values(j - 1));
    }
    const Eigen::MatrixXd rebuilt =
        r.left_factors * r.singular_values.asDiagonal() * r.right_factors.transpose();
    CHECK((rebuilt - m.values()).norm() <= 1e-10 * scale);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    CHECK((r.left_factors.transpose() * r.left_factors - id).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((r.right_factors.transpose() * r.right_factors - id).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("numerical rank") {
  CHECK(numerical_rank(SquareMatrix(4)) == 0);
  CHECK(numerical_rank(diag({1, 0, 0}), 1e-8) == 1);
  Sampler s(RngStream(15));
  // u, w orthonormal; v, z orthonormal.
  const Eigen::MatrixXd left = testing::orthogonal_matrix(5, s);
  const Eigen::MatrixXd right = testing::orthogonal_matrix(5, s);
  const Eigen::MatrixXd m =
      left.col(0) * right.col(0).transpose() + 2.0 * left.col(1) * right.col(1).transpose();
  CHECK(numerical_rank(SquareMatrix(m)) == 2);
  CHECK_THROWS_AS(numerical_rank(diag({1, 2}), -1.0), InvalidArgument);
}

TEST_CASE("nuclear distance to rank matches the tail sum") {
  CHECK(nuclear_distance_to_rank(diag({3, 2, 1}), 1) == doctest::Approx(3.0));
  CHECK(nuclear_distance_to_rank(SquareMatrix(3), 2) == 0.0);
  CHECK_THROWS_AS(nuclear_distance_to_rank(diag({1, 2}), 3), InvalidArgument);

  // Random search over rank-one candidates sigma u v^T never beats the tail sum.
  const SquareMatrix m = diag({3, 2, 1});
  Sampler s(RngStream(16));
  double best = INFINITY;
  for (int trial = 0; trial < 20000; ++trial) {
    Eigen::Vector3d u = testing::unit_vector(3, s), v = testing::unit_vector(3, s);
    // Half the candidates are local perturbations of the optimum e1 e1^T.
    if (trial % 2 == 0) {
      u = (Eigen::Vector3d::UnitX() + 0.05 * testing::unit_vector(3, s)).normalized();
      v = (Eigen::Vector3d::UnitX() + 0.05 * testing::unit_vector(3, s)).normalized();
    }
    const double sigma = 6.0 * s.uniform() - 1.0;
    const double dist =
        nuclear_norm(m - SquareMatrix(Eigen::MatrixXd(sigma * u * v.transpose())));
    best = std::min(best, dist);
  }
  CHECK(best >= 3.0 - 1e-9);
  CHECK(best <= 3.0 + 0.05);  // the search gets close to the optimum

  Sampler t(RngStream(17));
  const SquareMatrix g = testing::gaussian_matrix(8, t);
  double prev = INFINITY;
  for (std::size_t k0 = 0; k0 <= 8; ++k0) {
    const double dist = nuclear_distance_to_rank(g, k0);
    CHECK(dist <= prev);
    prev = dist;
  }
  CHECK(nuclear_distance_to_rank(g, 8) == 0.0);
}

TEST_CASE("truncate to rank") {
  const SquareMatrix t = truncate_to_rank(diag({3, 2, 1}), 2);
  CHECK((t.values() - diag({3, 2, 0}).values()).norm() <= 1e-12);
  CHECK(frobenius_norm(truncate_to_rank(diag({3, 2, 1}), 0)) == 0.0);
  Sampler s(RngStream(18));
  const Eigen::MatrixXd left = testing::orthogonal_matrix(6, s);
  const Eigen::MatrixXd right = testing::orthogonal_matrix(6, s);
  Eigen::VectorXd sv = Eigen::VectorXd::Zero(6);
  sv.head(3) << 4.0, 2.0, 0.5;
  const SquareMatrix exact(Eigen::MatrixXd(left * sv.asDiagonal() * right.transpose()));
  CHECK(frobenius_norm(truncate_to_rank(exact, 3) - exact) <= 1e-10);

  const SquareMatrix g = testing::gaussian_matrix(6, s);
  for (std::size_t k0 = 0; k0 <= 6; ++k0) {
    const SquareMatrix tr = truncate_to_rank(g, k0);
    CHECK(numerical_rank(tr) <= k0);
    CHECK(std::abs(nuclear_norm(g - tr) - nuclear_distance_to_rank(g, k0)) <= 1e-10);
  }
  CHECK_THROWS_AS(truncate_to_rank(g, 7), InvalidArgument);
}

TEST_CASE("norm sandwich and orthogonal invariance") {
  Sampler s(RngStream(19));
  for (int r = 0; r < 50; ++r) {
    const std::size_t d = 2 + static_cast<std::size_t>(r % 9);
    const std::size_t k = 1 + static_cast<std::size_t>(r % static_cast<int>(d));
    const SquareMatrix low =
        truncate_to_rank(testing::gaussian_matrix(d, s), std::min<std::size_t>(k, d));
    const std::size_t rank = numerical_rank(low);
    const double f = frobenius_norm(low), nuc = nuclear_norm(low);
    CHECK(f <= nuc + 1e-12);
    CHECK(nuc <= std::sqrt(static_cast<double>(rank)) * f + 1e-8);

    const Eigen::MatrixXd p = testing::orthogonal_matrix(d, s), q = testing::orthogonal_matrix(d, s);
    const SquareMatrix rotated(Eigen::MatrixXd(p * low.values() * q));
    CHECK(std::abs(frobenius_norm(rotated) - f) <= 1e-10 * f);
    CHECK(std::abs(nuclear_norm(rotated) - nuc) <= 1e-10 * nuc);
  }
}
