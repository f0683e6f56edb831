#pragma once

// Named sublevel-set fixtures: the smooth convex examples, the known
// counterexamples for the certificates, and their membership predicates.

#include <sconvex/geometry.hpp>
#include <sconvex/polynomial.hpp>
#include <sconvex/sublevel.hpp>

#include <numbers>

namespace sconvex {

struct Fixture {
  std::string name;
  std::string description;
  SublevelSet set;
  BoundarySampler boundary;
  MembershipPredicate predicate;
  // Smallest r for which the set is r-convex, when known in closed form.
  std::optional<double> known_min_radius;
};

namespace detail {

using Terms = std::vector<std::pair<std::vector<int>, double>>;

inline ConstraintFunction poly(int dim, int degree, const Terms& terms, std::string name) {
  return ConstraintFunction::from_polynomial(Polynomial::from_terms(dim, degree, terms),
                                             std::move(name));
}

inline std::vector<Vec> circle_points(std::size_t count, double radius, double offset = 0.0) {
  std::vector<Vec> pts;
  for (const Vec& v : unit_directions(2, count, offset)) pts.push_back(radius * v);
  return pts;
}

inline Fixture finish(std::string name, std::string description, SublevelSet set,
                      std::optional<BoundarySampler> boundary = std::nullopt) {
  MembershipPredicate pred = as_predicate(set);
  BoundarySampler b = boundary ? *boundary
                               : BoundarySampler::rays(BoundarySampler::default_count(set.dim()), 11);
  return Fixture{std::move(name), std::move(description), std::move(set), std::move(b),
                 std::move(pred), std::nullopt};
}

}  // namespace detail

inline std::vector<std::string> fixture_names() {
  return {"disk", "ellipse", "annulus", "two-disk", "cubic3d", "quartic", "halfplane"};
}

inline Fixture make_fixture(const std::string& name) {
  using detail::poly;
  const Box box2 = Box::cube(2, 2.0);
  if (name == "disk") {
    auto f = detail::finish("disk", "unit disk |x|^2 - 1 <= 0",
                            SublevelSet({poly(2, 2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -1.0}},
                                              "g1")},
                                        box2));
    f.known_min_radius = 1.0;
    return f;
  }
  if (name == "ellipse") {
    auto f = detail::finish("ellipse", "ellipse x1^2 + 4 x2^2 - 1 <= 0",
                            SublevelSet({poly(2, 2, {{{2, 0}, 1.0}, {{0, 2}, 4.0}, {{0, 0}, -1.0}},
                                              "g1")},
                                        box2));
    Mat p = Mat::Zero(2, 2);
    p(0, 0) = 1.0;
    p(1, 1) = 4.0;
    f.known_min_radius = ellipsoid_min_radius(p);
    return f;
  }
  if (name == "annulus") {
    // g1 <= 0 and -g1 <= 0: the unit circle, a set without interior.
    const ConstraintFunction g1 = poly(2, 2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -1.0}}, "g1");
    ConstraintFunction g2 = g1.negated();
    g2.name = "g2";
    SublevelSet s({g1, g2}, box2);
    auto f = detail::finish("annulus", "unit circle as {g <= 0, -g <= 0}", s,
                            BoundarySampler::points(detail::circle_points(256, 1.0)));
    f.predicate.sampler = constraint_projection_sampler(s, 1e-9);
    return f;
  }
  if (name == "two-disk") {
    // Omega is the unit disk; the second constraint is active only at (1,0).
    const ConstraintFunction g1 = poly(2, 2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -1.0}}, "g1");
    const ConstraintFunction g2 =
        poly(2, 2, {{{2, 0}, -1.0}, {{1, 0}, 4.0}, {{0, 2}, -1.0}, {{0, 0}, -3.0}}, "g2");
    // Half-step offset keeps (1,0) from appearing twice.
    auto pts = detail::circle_points(255, 1.0, std::numbers::pi / 255.0);
    pts.insert(pts.begin(), Vec::Unit(2, 0));
    auto f = detail::finish("two-disk", "unit disk cut by the outside of B((2,0),1)",
                            SublevelSet({g1, g2}, box2), BoundarySampler::points(pts));
    f.known_min_radius = 1.0;
    return f;
  }
  if (name == "cubic3d") {
    // Union of the ray {x1 <= 0, x2 = x3 = 0} and the line {x1 = x3 = 0}.
    const ConstraintFunction g1 = poly(3, 6, {{{3, 3, 0}, 1.0}, {{0, 0, 1}, 1.0}}, "g1");
    ConstraintFunction g2 = g1.negated();
    g2.name = "g2";
    const ConstraintFunction g3 = poly(3, 1, {{{1, 0, 0}, 1.0}}, "g3");
    const ConstraintFunction g4 = poly(3, 1, {{{0, 0, 1}, 1.0}}, "g4");
    ConstraintFunction g5 = g4.negated();
    g5.name = "g5";
    SublevelSet s({g1, g2, g3, g4, g5}, Box::cube(3, 1.0));
    std::vector<Vec> pts;
    for (int k = 0; k <= 16; ++k) {
      const double a = static_cast<double>(k) / 16.0;
      Vec p(3);
      p << -a, 0.0, 0.0;
      pts.push_back(p);
      if (k > 0) {
        Vec q(3);
        q << 0.0, a, 0.0;
        pts.push_back(q);
        pts.push_back(-q);
      }
    }
    auto f = detail::finish("cubic3d", "non-convex union of a ray and a line in R^3", s,
                            BoundarySampler::points(pts));
    f.predicate.sampler = [](Rng& rng) {
      Vec x = Vec::Zero(3);
      if (rng.uniform() < 0.5) {
        x[0] = -rng.uniform();
      } else {
        x[1] = rng.uniform(-1.0, 1.0);
      }
      return x;
    };
    return f;
  }
  if (name == "quartic") {
    auto f = detail::finish(
        "quartic", "|x|^4 - 1 <= 0",
        SublevelSet({poly(2, 4,
                          {{{4, 0}, 1.0}, {{2, 2}, 2.0}, {{0, 4}, 1.0}, {{0, 0}, -1.0}}, "g1")},
                    box2));
    f.known_min_radius = 1.0;
    return f;
  }
  if (name == "halfplane") {
    Vec seed(2);
    seed << -1.0, 0.0;
    return detail::finish("halfplane", "x1 <= 0 inside the box",
                          SublevelSet({poly(2, 1, {{{1, 0}, 1.0}}, "g1")}, box2),
                          BoundarySampler::rays(64, 11, seed));
  }
  throw ConfigError("unknown fixture '" + name + "'");
}

}  // namespace sconvex
