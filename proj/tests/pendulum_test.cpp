#include <sconvex/pendulum.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace sconvex;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }

CellGrid scenario_grid() {
  const double side = 0.4 * std::sqrt(2.0);
  return CellGrid::uniform(Vec::Constant(2, -2.5 * side), Vec::Constant(2, side), {5, 5});
}

bool is_subset(const std::vector<Transition>& a, const std::vector<Transition>& b) {
  const std::set<Transition> sb(b.begin(), b.end());
  for (const auto& t : a) {
    if (!sb.count(t)) return false;
  }
  return true;
}

}  // namespace

TEST(PendulumField, Examples) {
  const VectorField vf = pendulum_field({1.0, 0.0, 0.0});
  EXPECT_EQ(vf.f(v2(0, 0)), v2(0, 0));
  Mat j(2, 2);
  j << 0, 1, -1, 0;
  EXPECT_EQ(vf.jac(v2(0, 0)), j);
  const VectorField damped = pendulum_field({1.0, 0.01, 0.0});
  const Vec f = damped.f(v2(std::numbers::pi / 2.0, 1.0));
  EXPECT_NEAR(f[0], 1.0, 1e-15);
  EXPECT_NEAR(f[1], -1.02, 1e-15);
  EXPECT_THROW(pendulum_field({0.0, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(pendulum_field({1.0, -0.1, 0.0}), std::invalid_argument);
}

TEST(PendulumField, DerivativesMatchFiniteDifferences) {
  const VectorField vf = pendulum_field({1.3, 0.2, -0.7});
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const Vec x = rng.uniform_in(Box::cube(2, 4.0));
    Mat fd(2, 2);
    for (int i = 0; i < 2; ++i) {
      const Vec e = 1e-6 * Vec::Unit(2, i);
      fd.col(i) = (vf.f(x + e) - vf.f(x - e)) / 2e-6;
    }
    EXPECT_LT((fd - vf.jac(x)).cwiseAbs().maxCoeff(), 1e-6);
    const Vec h = rng.unit_vector(2);
    const double eps = 1e-4;
    const Vec second = (vf.f(x + eps * h) - 2.0 * vf.f(x) + vf.f(x - eps * h)) / (eps * eps);
    EXPECT_LT((second - vf.hess_quadform(x, h)).norm(), 1e-5);
  }
}

TEST(PendulumConstants, FirstStepBounds) {
  const PendulumConstants c = pendulum_constants({1.0, 0.01, 0.0}, 0.32);
  EXPECT_DOUBLE_EQ(c.omega_hat, 1.0);
  EXPECT_LE(c.l1_at_t(), 0.37);
  EXPECT_LE(c.lambda_plus, 1.0);
  EXPECT_GE(c.lambda_minus, -1.02);
  EXPECT_TRUE(c.preconditions_ok);
  // Independent evaluation of the closed form at omega_hat = 1.
  const double expect = (std::sinh(0.96) + std::sinh(0.32) * (6.0 / std::sqrt(2.0) - 3.0)) /
                        (12.0 * std::pow(1.0 + 1.01 * 1.01, -1.5));
  EXPECT_NEAR(c.l1_at_t(), expect, 1e-14);
  EXPECT_NEAR(c.lambda_plus, -0.01 + std::sqrt(1e-4 + 1.0), 1e-15);
}

TEST(PendulumConstants, OmegaHatAndPreconditions) {
  EXPECT_NEAR(pendulum_constants({1.0, 0.0, -1.0}, 0.1).omega_hat, std::pow(2.0, 0.25), 1e-15);
  EXPECT_DOUBLE_EQ(pendulum_constants({0.5, 0.0, 0.0}, 0.1).omega_hat, 1.0);
  EXPECT_TRUE(pendulum_constants({1.0, 0.0, 0.0}, std::numbers::pi / 2.0).preconditions_ok);
  const PendulumConstants late = pendulum_constants({1.0, 0.0, 0.0}, 1.6);
  EXPECT_FALSE(late.preconditions_ok);
  EXPECT_EQ(late.reasons.size(), 1u);
  EXPECT_FALSE(pendulum_constants({1.0, 0.9, 0.0}, 0.1).preconditions_ok);
}

// The closed forms bound the symmetric-part eigenvalues everywhere.
TEST(PendulumConstants, BoundsEstimatedSpectrum) {
  for (double u : {0.0, -1.0, 0.7}) {
    const PendulumParams p{1.2, 0.05, u};
    const PendulumConstants c = pendulum_constants(p, 0.2);
    const GrowthBounds b = estimate_bounds(pendulum_field(p), Box::cube(2, 5.0));
    EXPECT_LE(b.lambda_plus, c.lambda_plus + 1e-9);
    EXPECT_GE(b.lambda_minus, c.lambda_minus - 1e-9);
  }
}

TEST(PendulumRadius, FirstAndSecondStep) {
  const PendulumRadius first = pendulum_radius({1.0, 0.01, 0.0}, 0.4, 0.32);
  ASSERT_TRUE(first.radius);
  EXPECT_TRUE(first.certified);
  EXPECT_LE(*first.radius, 1.24);
  EXPECT_GT(*first.radius, 0.4);
  const PendulumRadius second = pendulum_radius({1.0, 0.01, -1.0}, 1.24, 0.32);
  ASSERT_TRUE(second.radius);
  EXPECT_LE(*second.radius, 12.0);
}

TEST(PendulumRadius, SmallSLimit) {
  const PendulumConstants c = pendulum_constants({1.0, 0.01, 0.0}, 0.32);
  const double growth = std::exp((2.0 * c.lambda_plus - c.lambda_minus) * 0.32);
  for (double s : {1e-3, 1e-5}) {
    const double r = *pendulum_radius({1.0, 0.01, 0.0}, s, 0.32).radius;
    EXPECT_NEAR(r / (s * growth), 1.0, 2.0 * s);
  }
}

TEST(PendulumRadius, InfeasibleWhenLoadTooLarge) {
  const PendulumRadius r = pendulum_radius({1.0, 0.01, 0.0}, 3.0, 0.32);
  EXPECT_FALSE(r.radius);
  EXPECT_FALSE(r.certified);
}

TEST(CellGrid, UniformLayoutAndLookup) {
  const CellGrid g = CellGrid::uniform(v2(0, 0), v2(1, 2), {3, 2});
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(g.label(1), "(1,0)");
  EXPECT_EQ(g.label(3), "(0,1)");
  EXPECT_EQ(g.cells_containing(v2(1.5, 3.0)), std::vector<std::size_t>{4});
  EXPECT_EQ(g.cells_containing(v2(1.0, 1.0)).size(), 2u);
  EXPECT_TRUE(g.cells_containing(v2(5, 5)).empty());
  EXPECT_THROW(CellGrid({Box::cube(2, 1.0), Box::cube(2, 0.5)}, {"a", "b"}), std::invalid_argument);
}

TEST(CellSource, CircumscribedDisk) {
  const CellGrid g = scenario_grid();
  const SourceRegion src = cell_source(g, 12, 0.4);
  const Ball& b = std::get<Ball>(src.operands.front().set);
  EXPECT_NEAR(b.radius, 0.4, 1e-12);
  EXPECT_LT(b.center.norm(), 1e-12);
  EXPECT_THROW(cell_source(g, 12, 0.3), ConfigError);
}

TEST(BoxMeets, SeparatedAndTouching) {
  const BallIntersection disk({SupportPatch(v2(1, 0), v2(1, 0), 1.0)});
  EXPECT_TRUE(box_meets_balls(Box(v2(0.5, 0.5), v2(2, 2)), disk));
  EXPECT_FALSE(box_meets_balls(Box(v2(0.8, 0.8), v2(2, 2)), disk));
  // The same corner box meets the tangent half-plane.
  EXPECT_TRUE(box_meets_halfspaces(Box(v2(0.8, 0.8), v2(2, 2)),
                                   BallIntersection({SupportPatch(v2(0, 1), v2(0, 1), 1.0)})));
  EXPECT_FALSE(box_meets_halfspaces(Box(v2(-1, 1.1), v2(1, 2)),
                                    BallIntersection({SupportPatch(v2(0, 1), v2(0, 1), 1.0)})));
}

TEST(Abstraction, ZeroFieldMatchesEmbedding) {
  const CellGrid g = scenario_grid();
  const SourceRegion src = cell_source(g, 12, 0.4);
  AbstractionOptions opt;
  const TransitionReport rep = zero_field_abstraction_step(g, src, {0.0}, 1.0, opt);
  const Ball& b = std::get<Ball>(src.operands.front().set);
  std::vector<std::size_t> expect;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const Vec nearest = g.cell(c).clamp(b.center);
    if ((nearest - b.center).norm() <= b.radius + 1e-9) expect.push_back(c);
  }
  std::vector<std::size_t> got;
  for (const auto& t : rep.balls) got.push_back(t.target);
  EXPECT_EQ(got, expect);
  EXPECT_TRUE(is_subset(rep.balls, rep.halfspaces));
}

TEST(Abstraction, SingletonSource) {
  const CellGrid g = scenario_grid();
  const PendulumParams base{1.0, 0.01, 0.0};
  const Vec x0 = v2(0.1, 0.15);
  SourceRegion src;
  src.id = 0;
  src.operands.push_back({Ball(x0, 0.0), 0.0});
  const TransitionReport rep = pendulum_abstraction_step(g, src, {0.0}, base, 0.32, {});
  const Vec x = integrate_state(pendulum_field(base), x0, 0.32, 1024);
  std::vector<std::size_t> got;
  for (const auto& t : rep.balls) got.push_back(t.target);
  EXPECT_EQ(got, g.cells_containing(x));
}

TEST(Abstraction, TransitionsSortedAndBallsInsideHalfspaces) {
  const CellGrid g = scenario_grid();
  const SourceRegion src = cell_source(g, 16, 0.4);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    AbstractionOptions opt;
    opt.patches = 4;
    opt.angle_offset = seeded_angle_offset(seed, opt.patches);
    const TransitionReport rep =
        pendulum_abstraction_step(g, src, {0.0, -1.0}, {1.0, 0.01, 0.0}, 0.32, opt);
    EXPECT_TRUE(std::is_sorted(rep.balls.begin(), rep.balls.end()));
    EXPECT_TRUE(is_subset(rep.balls, rep.halfspaces)) << seed;
    EXPECT_EQ(rep.spurious_eliminated, rep.halfspaces.size() - rep.balls.size());
    EXPECT_TRUE(rep.certified);
  }
}

// Soundness: cells hit by flowed samples are all reported.
TEST(Abstraction, MonteCarloSoundness) {
  const CellGrid g = scenario_grid();
  const SourceRegion src = cell_source(g, 16, 0.4);
  const PendulumParams base{1.0, 0.01, 0.0};
  const std::vector<double> controls{0.0, -1.0};
  AbstractionOptions opt;
  opt.patches = 8;
  const TransitionReport rep = pendulum_abstraction_step(g, src, controls, base, 0.32, opt);
  const std::set<Transition> balls(rep.balls.begin(), rep.balls.end());
  const Box cell = g.cell(16);
  Rng rng(17);
  for (std::size_t ci = 0; ci < controls.size(); ++ci) {
    PendulumParams p = base;
    p.u = controls[ci];
    const VectorField vf = pendulum_field(p);
    for (int k = 0; k < 2000; ++k) {
      const Vec x = integrate_state(vf, rng.uniform_in(cell), 0.32, 128);
      for (std::size_t target : g.cells_containing(x)) {
        EXPECT_TRUE(balls.count({16, ci, target})) << ci << " " << target;
      }
    }
  }
}
