#include <sconvex/core.hpp>
#include <sconvex/linalg.hpp>
#include <sconvex/polynomial.hpp>

#include <gtest/gtest.h>

using namespace sconvex;

TEST(SymmetricPart, TwoByTwoMatchesEigensolver) {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    Mat a(2, 2);
    a << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    const SpectrumRange r = symmetric_part_extremes(a);
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (a + a.transpose()));
    EXPECT_NEAR(r.min, eig.eigenvalues().minCoeff(), 1e-12);
    EXPECT_NEAR(r.max, eig.eigenvalues().maxCoeff(), 1e-12);
  }
}

TEST(SymmetricPart, ThreeByThreeDiagonal) {
  const Mat a = Eigen::Vector3d(3.0, -1.0, 2.0).asDiagonal();
  const SpectrumRange r = symmetric_part_extremes(a);
  EXPECT_DOUBLE_EQ(r.min, -1.0);
  EXPECT_DOUBLE_EQ(r.max, 3.0);
}

TEST(KernelBasis, OrthonormalAndOrthogonalToGradient) {
  Rng rng(9);
  for (int dim = 2; dim <= 5; ++dim) {
    const Vec g = rng.unit_vector(dim) * 3.0;
    const Mat k = kernel_basis(g);
    ASSERT_EQ(k.cols(), dim - 1);
    EXPECT_LT((k.transpose() * k - Mat::Identity(dim - 1, dim - 1)).norm(), 1e-12);
    EXPECT_LT((g.transpose() * k).norm(), 1e-12);
  }
}

TEST(NullSpace, RankDeficientRows) {
  Mat rows(2, 3);
  rows << 1, 0, 0, 2, 0, 0;
  const Mat n = null_space(rows);
  EXPECT_EQ(n.cols(), 2);
  EXPECT_LT((rows * n).norm(), 1e-12);
}

TEST(LinearIndependence, DetectsParallelVectors) {
  EXPECT_FALSE(linearly_independent({Eigen::Vector2d(2, 0), Eigen::Vector2d(2, 0)}, 1e-8));
  EXPECT_TRUE(linearly_independent({Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)}, 1e-8));
  EXPECT_FALSE(linearly_independent({Eigen::Vector2d(0, 0)}, 1e-8));
}

TEST(Simplex, SmallKnownOptimum) {
  // max 3x + 2y  s.t.  x + y <= 4, x + 3y <= 6, x <= 3  ->  (3, 1), value 11.
  Mat a(3, 2);
  a << 1, 1, 1, 3, 1, 0;
  const LpResult r = maximize_origin_feasible(Eigen::Vector2d(3, 2), a, Eigen::Vector3d(4, 6, 3));
  ASSERT_EQ(r.status, LpResult::Status::kOptimal);
  EXPECT_NEAR(r.value, 11.0, 1e-12);
  EXPECT_NEAR(r.x[0], 3.0, 1e-12);
  EXPECT_NEAR(r.x[1], 1.0, 1e-12);
}

TEST(Simplex, Unbounded) {
  Mat a(1, 2);
  a << 1, -1;
  const LpResult r = maximize_origin_feasible(Eigen::Vector2d(0, 1), a, Eigen::VectorXd::Ones(1));
  EXPECT_EQ(r.status, LpResult::Status::kUnbounded);
}

TEST(InteriorDirection, HalfspaceAndOpposedPair) {
  auto [t1, p1] = interior_direction_lp({Eigen::Vector2d(2, 0)}, 2);
  EXPECT_NEAR(t1, 2.0, 1e-12);
  EXPECT_LT(p1[0], 0.0);
  auto [t2, p2] = interior_direction_lp({Eigen::Vector2d(2, 0), Eigen::Vector2d(-2, 0)}, 2);
  EXPECT_NEAR(t2, 0.0, 1e-12);
  (void)p2;
}

// Brute-force oracle: max over a fine grid of p in [-1,1]^2 of min_j -a_j.p.
TEST(InteriorDirection, MatchesGridSearch) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vec> rows;
    const int m = 1 + trial % 3;
    for (int j = 0; j < m; ++j) rows.push_back(rng.unit_vector(2) * rng.uniform(0.5, 2.0));
    const double lp = interior_direction_lp(rows, 2).first;
    double best = 0.0;
    for (int i = 0; i <= 400; ++i) {
      for (int k = 0; k <= 400; ++k) {
        const Eigen::Vector2d p(-1.0 + i / 200.0, -1.0 + k / 200.0);
        double worst = kInf;
        for (const Vec& a : rows) worst = std::min(worst, -a.dot(p));
        best = std::max(best, worst);
      }
    }
    EXPECT_GE(lp, best - 1e-12);
    EXPECT_LE(lp, best + 0.02);
  }
}

TEST(Polynomial, DenseOrderingTwoVariables) {
  const auto e = monomial_exponents(2, 2);
  const std::vector<std::vector<int>> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(e, want);
  EXPECT_EQ(dense_coefficient_count(3, 6), 84u);
}

TEST(Polynomial, DerivativesAgainstFiniteDifferences) {
  Rng rng(2);
  std::vector<double> c(dense_coefficient_count(2, 4));
  for (double& v : c) v = rng.normal();
  const Polynomial p(2, 4, c);
  for (int k = 0; k < 20; ++k) {
    const Vec x = rng.uniform_in(Box::cube(2, 1.0));
    const double eps = 1e-6;
    for (int i = 0; i < 2; ++i) {
      const Vec e = eps * Vec::Unit(2, i);
      EXPECT_NEAR(p.gradient(x)[i], (p.value(x + e) - p.value(x - e)) / (2 * eps), 1e-6);
    }
    const Vec h = rng.unit_vector(2);
    const double e2 = 1e-4;
    const double fd = (p.value(x + e2 * h) - 2 * p.value(x) + p.value(x - e2 * h)) / (e2 * e2);
    EXPECT_NEAR(p.hessian_quadform(x, h), fd, 1e-4);
  }
}

TEST(Polynomial, RejectsWrongCoefficientCount) {
  EXPECT_THROW(Polynomial(2, 2, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(Polynomial(2, 9, std::vector<double>(55, 0.0)), std::invalid_argument);
}

TEST(Rng, DeterministicAndSeedSensitive) {
  Rng a(42), b(42), c(43);
  for (int k = 0; k < 10; ++k) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
}

TEST(Box, ExitDistanceAndInflation) {
  const Box b = Box::cube(2, 1.0);
  EXPECT_NEAR(b.exit_distance(Vec::Zero(2), Eigen::Vector2d(1, 0)), 1.0, 1e-15);
  EXPECT_THROW(Box(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), std::invalid_argument);
  EXPECT_TRUE(b.inflated(0.1).contains(Eigen::Vector2d(1.05, 0)));
}
