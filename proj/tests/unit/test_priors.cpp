#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "lowrank/priors.hpp"

using namespace lowrank;

TEST_CASE("gamma for separation") {
  CHECK(gamma_for_separation(NormTag::frobenius, 0.2, 10, 3) == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(gamma_for_separation(NormTag::nuclear, 1.0, 10, 4) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(gamma_for_separation(NormTag::frobenius, 7.0, 7, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(gamma_for_separation(NormTag::frobenius, 0.0, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(gamma_for_separation(NormTag::nuclear, 1.0, 4, 5), InvalidArgument);
  CHECK_THROWS_AS(gamma_for_separation(NormTag::nuclear, 1.0, 4, 0), InvalidArgument);
}

TEST_CASE("block sizes") {
  CHECK(BlockRademacherPrior(6, 2, 1.0).block_sizes() == std::vector<std::size_t>{3, 3});
  CHECK(BlockRademacherPrior(7, 3, 1.0).block_sizes() == std::vector<std::size_t>{2, 2, 3});
  CHECK(BlockRademacherPrior(5, 5, 1.0).block_sizes() == std::vector<std::size_t>{1, 1, 1, 1, 1});
  CHECK_THROWS_AS(BlockRademacherPrior(3, 4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(BlockRademacherPrior(3, 1, 0.0), InvalidArgument);
}

TEST_CASE("block draws satisfy the prior invariants") {
  const BlockRademacherPrior prior(4, 2, 1.0);
  for (int r = 0; r < 200; ++r) {
    const SquareMatrix theta = draw_block_rademacher(prior, RngStream(31).child(r));
    CHECK(theta.values().cwiseAbs().minCoeff() == 1.0);
    CHECK(theta.values().cwiseAbs().maxCoeff() == 1.0);
    CHECK(frobenius_norm(theta) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(numerical_rank(theta) <= 2);
  }
  const BlockRademacherPrior odd(7, 3, 0.3);
  for (int r = 0; r < 50; ++r) {
    const SquareMatrix theta = draw_block_rademacher(odd, RngStream(32).child(r));
    CHECK(frobenius_norm(theta) == doctest::Approx(0.3 * 7).epsilon(1e-14));
    CHECK(numerical_rank(theta) <= 3);
  }
}

TEST_CASE("one by one prior is a fair sign") {
  const BlockRademacherPrior prior(1, 1, 0.5);
  int plus = 0;
  Sampler s(RngStream(33));
  for (int r = 0; r < 10000; ++r) {
    const double v = draw_block_rademacher(prior, s)(0, 0);
    CHECK(std::abs(v) == 0.5);
    plus += v > 0 ? 1 : 0;
  }
  CHECK(std::abs(plus / 10000.0 - 0.5) <= 0.05);
}

TEST_CASE("columns within a block are proportional") {
  const BlockRademacherPrior prior(6, 2, 1.0);
  for (int r = 0; r < 20; ++r) {
    const Eigen::MatrixXd w = draw_block_rademacher(prior, RngStream(34).child(r)).values();
    for (int block = 0; block < 2; ++block) {
      const Eigen::VectorXd first = w.col(3 * block);
      for (int j = 1; j < 3; ++j) {
        const Eigen::VectorXd col = w.col(3 * block + j);
        CHECK((col == first || col == -first));
      }
    }
  }
}

TEST_CASE("with-signs draw reassembles") {
  const BlockRademacherPrior prior(5, 2, 0.7);
  Sampler s(RngStream(35));
  const BlockDraw draw = draw_block_rademacher_with_signs(prior, s);
  CHECK(prior.assemble(draw.directions, draw.column_signs).values() == draw.theta.values());
  const Eigen::MatrixXd v = scaled_direction_matrix(draw.directions);
  CHECK(v.rows() == 5);
  CHECK(v.cols() == 2);
  CHECK(v.cwiseAbs().maxCoeff() == doctest::Approx(1.0 / std::sqrt(5.0)));
}

TEST_CASE("enumerated prior") {
  const DiscretePrior small = enumerate_prior(2, 1, 1.0);
  CHECK(small.size() == 16);
  for (double w : small.weights()) CHECK(w == 1.0 / 16.0);
  for (const SquareMatrix& a : small.atoms()) CHECK(frobenius_norm(a) == doctest::Approx(2.0));

  const DiscretePrior mid = enumerate_prior(4, 1, 0.25);
  CHECK(mid.size() == 256);
  double total = 0;
  for (double w : mid.weights()) total += w;
  CHECK(std::abs(total - 1.0) <= 1e-12);

  // Functional (sum of first row)^2 under the sampler versus the atom average.
  auto functional = [](const SquareMatrix& m) { return std::pow(m.values().row(0).sum(), 2); };
  double exact = 0;
  for (std::size_t a = 0; a < mid.size(); ++a) exact += mid.weights()[a] * functional(mid.atoms()[a]);
  std::vector<double> sampled;
  Sampler s(RngStream(36));
  const BlockRademacherPrior prior(4, 1, 0.25);
  for (int r = 0; r < 100000; ++r) sampled.push_back(functional(draw_block_rademacher(prior, s)));
  const auto m = testing::mean_se(sampled);
  CHECK(std::abs(m.mean - exact) <= 3.5 * m.se);

  CHECK_THROWS_AS(enumerate_prior(5, 4, 1.0), GuardViolation);
}

TEST_CASE("discrete prior validation") {
  CHECK_THROWS_AS(DiscretePrior({}, {}), InvalidArgument);
  CHECK_THROWS_AS(DiscretePrior({SquareMatrix(2)}, {0.5}), InvalidArgument);
  CHECK_THROWS_AS(DiscretePrior({SquareMatrix(2), SquareMatrix(3)}, {0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(DiscretePrior({SquareMatrix(2), SquareMatrix(2)}, {1.5, -0.5}), InvalidArgument);
  const DiscretePrior u = DiscretePrior::uniform({SquareMatrix(2), SquareMatrix::identity(2),
                                                  SquareMatrix::identity(2)});
  double total = 0;
  for (double w : u.weights()) total += w;
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("random low rank signals") {
  for (int r = 0; r < 20; ++r) {
    const SquareMatrix one = draw_random_low_rank(6, 1, 2.0, NormTag::frobenius, RngStream(37).child(r));
    const Eigen::VectorXd sv = singular_values(one);
    CHECK(sv(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sv(1) <= 1e-12);
  }
  for (Spectrum spectrum : {Spectrum::flat, Spectrum::random}) {
    for (int r = 0; r < 50; ++r) {
      const std::size_t k = 1 + static_cast<std::size_t>(r % 5);
      const SquareMatrix nuc =
          draw_random_low_rank(8, k, 1.7, NormTag::nuclear, RngStream(38).child(r), spectrum);
      CHECK(std::abs(nuclear_norm(nuc) - 1.7) <= 1e-10);
      CHECK(numerical_rank(nuc) <= k);
      CHECK(frobenius_norm(nuc) >= nuclear_norm(nuc) / std::sqrt(static_cast<double>(k)) - 1e-12);
      const SquareMatrix frob =
          draw_random_low_rank(8, k, 0.4, NormTag::frobenius, RngStream(39).child(r), spectrum);
      CHECK(std::abs(frobenius_norm(frob) - 0.4) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(draw_random_low_rank(3, 4, 1.0, NormTag::frobenius, RngStream(1)), InvalidArgument);
}

TEST_CASE("quantum states") {
  const SquareMatrix proj = draw_quantum_state(5, 1, RngStream(40));
  CHECK(nuclear_norm(proj) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((proj.values() * proj.values() - proj.values()).norm() <= 1e-12);
  for (int r = 0; r < 100; ++r) {
    const std::size_t k = 1 + static_cast<std::size_t>(r % 4);
    const SquareMatrix rho = draw_quantum_state(6, k, RngStream(41).child(r));
    CHECK(std::abs(rho.values().trace() - 1.0) <= 1e-12);
    CHECK((rho.values() - rho.values().transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho.values());
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    CHECK(numerical_rank(rho) <= k);
  }
}

TEST_CASE("prior concentration on the alternative") {
  // Smaller than the acceptance configuration; same event and bounds.
  const std::size_t d = 64, k = 4;
  const double gamma = 0.01;
  const BlockRademacherPrior prior(d, k, gamma);
  int good = 0;
  const int draws = 60;
  for (int r = 0; r < draws; ++r) {
    Sampler s(RngStream(42).child(r));
    const BlockDraw draw = draw_block_rademacher_with_signs(prior, s);
    const Eigen::JacobiSVD<Eigen::MatrixXd> sv(scaled_direction_matrix(draw.directions));
    if (sv.singularValues().minCoeff() < 0.5) continue;
    ++good;
    const double scale = gamma * static_cast<double>(d);
    CHECK(nuclear_norm(draw.theta) >= scale * std::sqrt(static_cast<double>(k)) / 2.0);
    for (std::size_t k0 = 0; k0 < k; ++k0) {
      CHECK(nuclear_distance_to_rank(draw.theta, k0) >=
            static_cast<double>(k - k0) * scale / (2.0 * std::sqrt(static_cast<double>(k))));
    }
  }
  CHECK(good >= 0.95 * draws);
}
