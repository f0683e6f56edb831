#pragma once

// Balls, supporting balls, ball intersections and the sampling oracles that
// test strong convexity of a set known only through a membership predicate.

#include <sconvex/core.hpp>

#include <functional>
#include <optional>
#include <string>

namespace sconvex {

struct Ball {
  Vec center;
  double radius = 0.0;

  Ball() = default;
  Ball(Vec c, double r) : center(std::move(c)), radius(r) {
    if (!(radius >= 0.0)) throw std::invalid_argument("Ball: negative radius");
  }
};

// Closed ball; B(c, 0) = {c}.
inline bool ball_contains(const Ball& b, const Vec& z, double inflation = 0.0) {
  return (z - b.center).norm() <= b.radius + inflation;
}

/// One supporting ball: boundary point, outward unit normal, radius.
struct SupportPatch {
  Vec point;
  Vec normal;
  double radius = 0.0;

  SupportPatch() = default;
  SupportPatch(Vec x, Vec v, double r)
      : point(std::move(x)), normal(std::move(v)), radius(r) {
    if (point.size() != normal.size()) {
      throw std::invalid_argument("SupportPatch: dimension mismatch");
    }
    if (std::abs(normal.norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("SupportPatch: normal is not a unit vector");
    }
    if (!(radius > 0.0)) throw std::invalid_argument("SupportPatch: radius must be positive");
  }
};

inline Ball supporting_ball(const SupportPatch& p) {
  return Ball(p.point - p.radius * p.normal, p.radius);
}

inline bool halfspace_contains(const SupportPatch& p, const Vec& z, double inflation = 0.0) {
  return p.normal.dot(z - p.point) <= inflation;
}

/// Intersection of the supporting balls of a nonempty patch list.
struct BallIntersection {
  std::vector<SupportPatch> patches;

  BallIntersection() = default;
  explicit BallIntersection(std::vector<SupportPatch> ps) : patches(std::move(ps)) {
    if (patches.empty()) throw std::invalid_argument("BallIntersection: no patches");
  }

  int dim() const { return static_cast<int>(patches.front().point.size()); }
  double min_radius() const {
    double r = kInf;
    for (const auto& p : patches) r = std::min(r, p.radius);
    return r;
  }
};

inline bool ball_intersection_membership(const BallIntersection& approx, const Vec& z,
                                         double inflation = 0.0) {
  for (const auto& p : approx.patches) {
    if (!ball_contains(supporting_ball(p), z, inflation)) return false;
  }
  return true;
}

inline bool halfspace_intersection_membership(const BallIntersection& approx, const Vec& z,
                                              double inflation = 0.0) {
  for (const auto& p : approx.patches) {
    if (!halfspace_contains(p, z, inflation)) return false;
  }
  return true;
}

// Patch-set union; the resulting intersection is the intersection of both.
inline BallIntersection merge(const BallIntersection& a, const BallIntersection& b) {
  std::vector<SupportPatch> ps = a.patches;
  ps.insert(ps.end(), b.patches.begin(), b.patches.end());
  return BallIntersection(std::move(ps));
}

// ---------------------------------------------------------------------------
// Membership predicates and sampling
// ---------------------------------------------------------------------------

/// A set known through `contains`. `bounds` is where points are searched for;
/// `sampler`, when set, draws points of the set directly (needed for sets of
/// measure zero, where rejection sampling never succeeds).
struct MembershipPredicate {
  std::function<bool(const Vec&)> contains;
  Box bounds;
  std::function<Vec(Rng&)> sampler;

  int dim() const { return bounds.dim(); }
};

struct SampleConfig {
  std::size_t pairs = 500;
  std::size_t alphas = 8;
  std::size_t probes = 64;
  std::uint64_t seed = 1;
  std::size_t rejection_budget = 200000;
  double boundary_tol = 1e-7;
};

inline Vec draw_member(const MembershipPredicate& set, Rng& rng, std::size_t budget) {
  if (set.sampler) {
    for (std::size_t k = 0; k < std::max<std::size_t>(budget / 1000, 16); ++k) {
      Vec x = set.sampler(rng);
      if (set.contains(x)) return x;
    }
    throw EmptySampleError("sampler produced no member of the set");
  }
  for (std::size_t k = 0; k < budget; ++k) {
    Vec x = rng.uniform_in(set.bounds);
    if (set.contains(x)) return x;
  }
  throw EmptySampleError("no point of the set found in the bounding box");
}

// Walks from a member `p` along `u` up to distance `t_max` and bisects to the
// last member point before membership flips. Returns a member of the set.
inline Vec push_to_boundary(const MembershipPredicate& set, const Vec& p, const Vec& u,
                            double t_max, double tol) {
  if (set.contains(p + t_max * u)) return p + t_max * u;
  double lo = 0.0;
  double hi = t_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (set.contains(p + mid * u)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return p + lo * u;
}

inline Vec push_to_boundary(const MembershipPredicate& set, const Vec& p, const Vec& u,
                            double tol) {
  return push_to_boundary(set, p, u, set.bounds.exit_distance(p, u), tol);
}

// ---------------------------------------------------------------------------
// Sigma-regularity oracle
// ---------------------------------------------------------------------------

struct OracleWitness {
  Vec x;
  Vec y;
  double alpha = 0.0;
  Vec probe;
};

struct OracleVerdict {
  bool pass = true;
  double radius = kInf;
  std::optional<OracleWitness> witness;
  std::size_t pairs_checked = 0;
  std::size_t probes_checked = 0;
  bool zero_sample_warning = false;
};

// Alpha grid: 1/2 followed by j/(K+1), j = 1..K-1.
inline std::vector<double> alpha_grid(std::size_t k) {
  std::vector<double> a;
  if (k == 0) return a;
  a.push_back(0.5);
  for (std::size_t j = 1; j < k; ++j) {
    a.push_back(static_cast<double>(j) / static_cast<double>(k + 1));
  }
  return a;
}

namespace detail {

// Three pair kinds, cycled by pair index: two members; two boundary points;
// two nearby boundary points reached from a common member. The last kind is
// what exposes local curvature violations on smooth sets.
inline std::pair<Vec, Vec> draw_pair(const MembershipPredicate& set, Rng& rng,
                                     std::size_t index, const SampleConfig& cfg) {
  const int dim = set.dim();
  switch (index % 3) {
    case 0: {
      Vec x = draw_member(set, rng, cfg.rejection_budget);
      Vec y = draw_member(set, rng, cfg.rejection_budget);
      return {x, y};
    }
    case 1: {
      const Vec p = draw_member(set, rng, cfg.rejection_budget);
      const Vec q = draw_member(set, rng, cfg.rejection_budget);
      return {push_to_boundary(set, p, rng.unit_vector(dim), cfg.boundary_tol),
              push_to_boundary(set, q, rng.unit_vector(dim), cfg.boundary_tol)};
    }
    default: {
      const Vec p = draw_member(set, rng, cfg.rejection_budget);
      const Vec u = rng.unit_vector(dim);
      const double eps = rng.uniform(0.05, 0.5);
      const Vec w = (u + eps * rng.unit_vector(dim)).normalized();
      return {push_to_boundary(set, p, u, cfg.boundary_tol),
              push_to_boundary(set, p, w, cfg.boundary_tol)};
    }
  }
}

}  // namespace detail

/// Samples pairs x, y of the set and probes the ball of radius
/// alpha(1-alpha)|x-y|^2 / (2r) around alpha*x + (1-alpha)*y. A closed set is
/// r-convex exactly when all such balls lie inside it, so a verified escaping
/// probe certifies that the set is not r-convex. `r = kInf` checks ordinary
/// convexity (only the centers are probed).
inline OracleVerdict sigma_regularity_oracle(const MembershipPredicate& set, double r,
                                             const SampleConfig& cfg) {
  if (!(r > 0.0)) throw std::invalid_argument("oracle radius must be positive");
  const double sigma = std::isinf(r) ? 0.0 : 1.0 / (2.0 * r);
  const int dim = set.dim();
  const auto alphas = alpha_grid(cfg.alphas);
  const auto dirs = unit_directions(dim, cfg.probes, 0.0, derive_seed(cfg.seed, 0xd1));

  OracleVerdict verdict;
  verdict.radius = r;
  for (std::size_t i = 0; i < cfg.pairs; ++i) {
    Rng rng(derive_seed(cfg.seed, i));
    const auto [x, y] = detail::draw_pair(set, rng, i, cfg);
    ++verdict.pairs_checked;
    const double d2 = (x - y).squaredNorm();
    for (double alpha : alphas) {
      const Vec z = alpha * x + (1.0 - alpha) * y;
      const double rho = sigma * alpha * (1.0 - alpha) * d2;
      const std::size_t n_probe = rho > 0.0 ? dirs.size() + 1 : 1;
      for (std::size_t k = 0; k < n_probe; ++k) {
        const Vec probe = k == 0 ? z : Vec(z + rho * dirs[k - 1]);
        ++verdict.probes_checked;
        if (set.contains(probe)) continue;
        // Re-verify with the probe pulled slightly toward the center so that
        // a predicate flickering at the probe sphere is not reported.
        const Vec strict = z + (1.0 - 1e-6) * (probe - z);
        if (set.contains(x) && set.contains(y) && !set.contains(strict)) {
          verdict.pass = false;
          verdict.witness = OracleWitness{x, y, alpha, strict};
          return verdict;
        }
      }
    }
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Local quadratic support
// ---------------------------------------------------------------------------

struct QuadraticSupportWitness {
  Vec z;
  double h_norm2 = 0.0;
  double mu = 0.0;
};

struct QuadraticSupportVerdict {
  bool pass = true;
  std::optional<QuadraticSupportWitness> witness;
  std::size_t samples_checked = 0;
  bool zero_sample_warning = false;
};

/// Checks |h|^2 <= 2 r mu for members z = x + h - mu v near x (h orthogonal to v).
inline QuadraticSupportVerdict quadratic_support_check(const MembershipPredicate& set,
                                                       const Vec& x, const Vec& v, double r,
                                                       double neighborhood,
                                                       const SampleConfig& cfg,
                                                       double tol = 1e-9) {
  if (!(r > 0.0) || !(neighborhood > 0.0)) {
    throw std::invalid_argument("quadratic_support_check: r and neighborhood must be positive");
  }
  if (std::abs(v.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("quadratic_support_check: v must be a unit vector");
  }
  QuadraticSupportVerdict out;
  Rng rng(derive_seed(cfg.seed, 0x95));

  auto check = [&](const Vec& z) {
    const Vec d = z - x;
    const double mu = -d.dot(v);
    const double h2 = (d + mu * v).squaredNorm();
    ++out.samples_checked;
    if (h2 > 2.0 * r * mu + tol && set.contains(z)) {
      out.pass = false;
      out.witness = QuadraticSupportWitness{z, h2, mu};
      return false;
    }
    return true;
  };

  const std::size_t wanted = cfg.pairs;
  std::size_t accepted = 0;
  for (std::size_t k = 0; k < cfg.rejection_budget && accepted < wanted; ++k) {
    const Vec z = rng.in_ball(x, neighborhood);
    if (!set.contains(z)) continue;
    ++accepted;
    if (!check(z)) return out;
    // Push outward along v within the neighborhood: boundary points are where
    // the parabola is tightest.
    const double b = (z - x).dot(v);
    const double c = (z - x).squaredNorm() - neighborhood * neighborhood;
    const double t_max = -b + std::sqrt(std::max(0.0, b * b - c));
    if (t_max > 0.0) {
      const Vec zb = push_to_boundary(set, z, v, t_max, cfg.boundary_tol);
      if (!check(zb)) return out;
    }
  }
  out.zero_sample_warning = accepted == 0;
  return out;
}

// ---------------------------------------------------------------------------
// Ball intersection versus half-space intersection
// ---------------------------------------------------------------------------

struct ComparisonReport {
  double ball_volume = 0.0;
  double halfspace_volume = 0.0;
  double ratio = 0.0;
  std::size_t samples = 0;
};

inline ComparisonReport compare_ball_vs_halfspace(const std::vector<SupportPatch>& patches,
                                                  const Box& box, std::size_t samples,
                                                  std::uint64_t seed) {
  if (patches.empty()) throw std::invalid_argument("compare_ball_vs_halfspace: no patches");
  const BallIntersection approx(patches);
  Rng rng(seed);
  std::size_t in_ball = 0;
  std::size_t in_half = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec z = rng.uniform_in(box);
    if (halfspace_intersection_membership(approx, z)) {
      ++in_half;
      if (ball_intersection_membership(approx, z)) ++in_ball;
    }
  }
  ComparisonReport rep;
  rep.samples = samples;
  rep.ball_volume = box.volume() * static_cast<double>(in_ball) / static_cast<double>(samples);
  rep.halfspace_volume =
      box.volume() * static_cast<double>(in_half) / static_cast<double>(samples);
  rep.ratio = rep.halfspace_volume > 0.0 ? rep.ball_volume / rep.halfspace_volume : 0.0;
  return rep;
}

}  // namespace sconvex
