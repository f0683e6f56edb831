#pragma once

// Damped pendulum on a cart with constant control acceleration u:
//   x1' = x2,
//   x2' = -w^2 sin x1 - u w^2 cos x1 - 2 g x2,
// closed-form constants for its attainable-set radius, and a one-step
// discrete abstraction over a grid of box cells.

#include <sconvex/core.hpp>
#include <sconvex/geometry.hpp>
#include <sconvex/reach.hpp>

#include <algorithm>
#include <set>
#include <tuple>

namespace sconvex {

struct PendulumParams {
  double omega = 1.0;
  double gamma = 0.0;
  double u = 0.0;

  void validate() const {
    if (!(omega > 0.0)) throw std::invalid_argument("pendulum omega must be positive");
    if (!(gamma >= 0.0)) throw std::invalid_argument("pendulum gamma must be nonnegative");
    if (!std::isfinite(u)) throw std::invalid_argument("pendulum control must be finite");
  }
};

inline VectorField pendulum_field(const PendulumParams& p) {
  p.validate();
  const double w2 = p.omega * p.omega;
  VectorField vf;
  vf.dim = 2;
  vf.name = "pendulum";
  vf.f = [p, w2](const Vec& x) {
    Vec out(2);
    out << x[1], -w2 * std::sin(x[0]) - p.u * w2 * std::cos(x[0]) - 2.0 * p.gamma * x[1];
    return out;
  };
  vf.jac = [p, w2](const Vec& x) {
    Mat j(2, 2);
    j << 0.0, 1.0, -w2 * std::cos(x[0]) + p.u * w2 * std::sin(x[0]), -2.0 * p.gamma;
    return j;
  };
  vf.hess_quadform = [p, w2](const Vec& x, const Vec& h) {
    Vec out(2);
    out << 0.0, (w2 * std::sin(x[0]) + p.u * w2 * std::cos(x[0])) * h[0] * h[0];
    return out;
  };
  // |d/dx1 (-w^2 cos x1 + u w^2 sin x1)| <= w^2 sqrt(1 + u^2).
  vf.lipschitz_jac = w2 * std::sqrt(1.0 + p.u * p.u);
  return vf;
}

struct PendulumConstants {
  PendulumParams params;
  double t = 0.0;
  double omega_hat = 1.0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  bool preconditions_ok = false;
  std::vector<std::string> reasons;

  double l1(double tau) const {
    const double w = omega_hat;
    const double g = params.gamma;
    const double num =
        std::sinh(3.0 * w * tau) +
        std::sinh(w * tau) * (12.0 * std::pow(1.0 / (w * w) + 1.0, -1.5) - 3.0);
    const double den = 12.0 * w * w * std::pow(1.0 + (w + g) * (w + g), -1.5);
    return num / den;
  }
  double l1_at_t() const { return l1(t); }

  GrowthBounds growth_bounds() const {
    GrowthBounds b;
    b.lambda_plus = lambda_plus;
    b.lambda_minus = lambda_minus;
    b.M1 = 2.0 * lambda_plus - lambda_minus;
    b.M2 = params.omega * params.omega * std::sqrt(1.0 + params.u * params.u);
    b.m2_raw = b.M2;
    b.domain = Box::cube(2, kInf);
    return b;
  }
};

inline PendulumConstants pendulum_constants(const PendulumParams& p, double t) {
  p.validate();
  if (!(t > 0.0)) throw std::invalid_argument("pendulum_constants: t must be positive");
  PendulumConstants c;
  c.params = p;
  c.t = t;
  c.omega_hat = std::max(1.0, p.omega * std::pow(1.0 + p.u * p.u, 0.25));
  const double w = c.omega_hat;
  const double root = std::sqrt(p.gamma * p.gamma + 0.25 * (1.0 + w * w) * (1.0 + w * w));
  c.lambda_plus = -p.gamma + root;
  c.lambda_minus = -p.gamma - root;
  c.preconditions_ok = true;
  if (p.gamma > 0.75 * w) {
    c.preconditions_ok = false;
    c.reasons.push_back("gamma exceeds 3/4 of omega_hat");
  }
  if (w * w - p.gamma * p.gamma < 0.0 ||
      2.0 * std::sqrt(w * w - p.gamma * p.gamma) * t > std::numbers::pi * (1.0 + 1e-12)) {
    c.preconditions_ok = false;
    c.reasons.push_back("2 sqrt(omega_hat^2 - gamma^2) t exceeds pi");
  }
  return c;
}

struct PendulumRadius {
  std::optional<double> radius;
  bool certified = false;
  double l1 = 0.0;
  PendulumConstants constants;
};

inline PendulumRadius pendulum_radius(const PendulumParams& p, double s, double t) {
  PendulumRadius out;
  out.constants = pendulum_constants(p, t);
  out.l1 = out.constants.l1_at_t();
  out.radius = radius_c2(s, t, out.l1, out.constants.growth_bounds());
  out.certified = out.constants.preconditions_ok && out.radius.has_value();
  return out;
}

// ---------------------------------------------------------------------------
// Cells
// ---------------------------------------------------------------------------

class CellGrid {
 public:
  CellGrid(std::vector<Box> cells, std::vector<std::string> labels)
      : cells_(std::move(cells)), labels_(std::move(labels)) {
    if (cells_.empty()) throw std::invalid_argument("cell grid is empty");
    if (labels_.size() != cells_.size()) throw std::invalid_argument("one label per cell");
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      for (std::size_t j = i + 1; j < cells_.size(); ++j) {
        const Vec lo = cells_[i].lower.cwiseMax(cells_[j].lower);
        const Vec hi = cells_[i].upper.cwiseMin(cells_[j].upper);
        if (((hi - lo).array() > 1e-12).all()) {
          throw std::invalid_argument("cells " + labels_[i] + " and " + labels_[j] + " overlap");
        }
      }
    }
  }

  // Row-major grid: the first axis varies fastest.
  static CellGrid uniform(const Vec& lower, const Vec& cell_size, const std::vector<int>& counts) {
    if (lower.size() != cell_size.size() || static_cast<std::size_t>(lower.size()) != counts.size()) {
      throw std::invalid_argument("grid lower, cell_size and counts must agree in dimension");
    }
    std::size_t total = 1;
    for (int c : counts) {
      if (c < 1) throw std::invalid_argument("grid counts must be positive");
      total *= static_cast<std::size_t>(c);
    }
    std::vector<Box> cells;
    std::vector<std::string> labels;
    const auto n = lower.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
      Vec lo(n);
      std::size_t rem = idx;
      std::string label;
      for (Eigen::Index d = 0; d < n; ++d) {
        const auto k = rem % static_cast<std::size_t>(counts[static_cast<std::size_t>(d)]);
        rem /= static_cast<std::size_t>(counts[static_cast<std::size_t>(d)]);
        lo[d] = lower[d] + cell_size[d] * static_cast<double>(k);
        label += (d ? "," : "") + std::to_string(k);
      }
      cells.emplace_back(lo, lo + cell_size);
      labels.push_back("(" + label + ")");
    }
    return CellGrid(std::move(cells), std::move(labels));
  }

  std::size_t size() const { return cells_.size(); }
  const Box& cell(std::size_t i) const { return cells_.at(i); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<Box>& cells() const { return cells_; }

  std::vector<std::size_t> cells_containing(const Vec& x, double tol = 0.0) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (cells_[i].contains(x, tol)) out.push_back(i);
    }
    return out;
  }

 private:
  std::vector<Box> cells_;
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Box emptiness tests
// ---------------------------------------------------------------------------

struct IntersectionTest {
  int iterations = 100;
  double gap_tol = 1e-9;
};

/// Alternating projection between `box` and the convex set K given by its
/// projector. Returns false only when a separating hyperplane certifies
/// that box and K are disjoint; any other outcome reports an intersection.
inline bool box_meets_convex(const Box& box, const std::function<Vec(const Vec&)>& project_k,
                             const Vec& start, const IntersectionTest& opt = {}) {
  Vec x = box.clamp(start);
  for (int it = 0; it < opt.iterations; ++it) {
    const Vec y = project_k(x);
    const Vec d = x - y;
    const double gap = d.norm();
    if (gap <= opt.gap_tol) return true;
    // Every w in K has <d, w> <= <d, y>. The box minimum of <d, z> is taken
    // at the corner selected by the signs of d.
    double box_min = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      box_min += d[i] * (d[i] > 0.0 ? box.lower[i] : box.upper[i]);
    }
    if (box_min > d.dot(y) + opt.gap_tol * gap) return false;
    x = box.clamp(y);
  }
  return true;
}

inline bool box_meets_balls(const Box& box, const BallIntersection& k, const IntersectionTest& opt = {}) {
  const auto ps = ball_projectors(k);
  return box_meets_convex(box, [&](const Vec& z) { return dykstra(ps, z); }, box.center(), opt);
}

inline bool box_meets_halfspaces(const Box& box, const BallIntersection& k,
                                 const IntersectionTest& opt = {}) {
  const auto ps = halfspace_projectors(k);
  return box_meets_convex(box, [&](const Vec& z) { return dykstra(ps, z); }, box.center(), opt);
}

// ---------------------------------------------------------------------------
// One-step abstraction
// ---------------------------------------------------------------------------

// One s-convex piece of a source region; pieces are over-approximated
// separately and their patch sets merged.
struct RegionOperand {
  InitialSet set;
  double s = 0.0;
};

struct SourceRegion {
  std::size_t id = 0;
  std::vector<RegionOperand> operands;
};

/// Circumscribed disk of a cell as its s-convex embedding. Throws when the
/// disk radius exceeds the requested s.
inline SourceRegion cell_source(const CellGrid& grid, std::size_t index, double s) {
  const Box& c = grid.cell(index);
  const double radius = 0.5 * c.diagonal();
  if (radius > s * (1.0 + 1e-12)) {
    throw ConfigError("cell " + grid.label(index) + " has circumscribed radius " +
                      std::to_string(radius) + " > s = " + std::to_string(s));
  }
  SourceRegion src;
  src.id = index;
  src.operands.push_back({Ball(c.center(), radius), radius});
  return src;
}

inline SourceRegion intersection_source(std::size_t id, const BallIntersection& k) {
  SourceRegion src;
  src.id = id;
  src.operands.push_back({k, k.min_radius()});
  return src;
}

enum class OverapproxMethod { kBalls, kHalfspaces };

struct Transition {
  std::size_t source = 0;
  std::size_t control = 0;
  std::size_t target = 0;
  bool operator==(const Transition&) const = default;
  bool operator<(const Transition& o) const {
    return std::tie(target, control, source) < std::tie(o.target, o.control, o.source);
  }
};

struct ControlApproximation {
  double u = 0.0;
  std::vector<double> radii;  // one per operand
  BallIntersection approx;
};

struct TransitionReport {
  bool ran_balls = false;
  bool ran_halfspaces = false;
  std::vector<Transition> balls;
  std::vector<Transition> halfspaces;
  std::vector<ControlApproximation> approximations;
  std::size_t spurious_eliminated = 0;  // in halfspaces but not in balls
  bool certified = true;
};

struct AbstractionOptions {
  std::size_t patches = 16;
  std::size_t steps = 1024;
  double angle_offset = 0.0;
  bool run_balls = true;
  bool run_halfspaces = true;
  IntersectionTest intersection;
};

// Rotation of the normal fan drawn from `seed`, within one angular step.
inline double seeded_angle_offset(std::uint64_t seed, std::size_t patches) {
  Rng rng(derive_seed(seed, 0x0ff5e7));
  return rng.uniform(0.0, 2.0 * std::numbers::pi / static_cast<double>(std::max<std::size_t>(patches, 1)));
}

using FieldFactory = std::function<VectorField(double u)>;
// Attainable-set radius for an s-convex piece under control u; empty when
// infeasible. The flag reports whether the radius is certified.
using RadiusRule = std::function<std::pair<std::optional<double>, bool>(double s, double u)>;

inline TransitionReport abstraction_step(const CellGrid& grid, const SourceRegion& source,
                                         const std::vector<double>& controls,
                                         const FieldFactory& field_for,
                                         const RadiusRule& radius_for, double horizon,
                                         const AbstractionOptions& opt = {}) {
  if (source.operands.empty()) throw std::invalid_argument("source region has no operands");
  if (controls.empty()) throw std::invalid_argument("no controls given");
  TransitionReport rep;
  rep.ran_balls = opt.run_balls;
  rep.ran_halfspaces = opt.run_halfspaces;
  ReachOptions ro;
  ro.directions = opt.patches;
  ro.steps = opt.steps;
  ro.angle_offset = opt.angle_offset;

  for (std::size_t ci = 0; ci < controls.size(); ++ci) {
    const double u = controls[ci];
    const VectorField vf = field_for(u);
    ControlApproximation ca;
    ca.u = u;
    std::optional<BallIntersection> merged;
    for (const auto& op : source.operands) {
      const auto [r, certified] = radius_for(op.s, u);
      if (!r) {
        throw InfeasibleRadiusError("no feasible radius for control " + std::to_string(u));
      }
      rep.certified = rep.certified && certified;
      ca.radii.push_back(*r);
      BallIntersection piece = reach_overapprox(vf, op.set, op.s, horizon, r, ro);
      merged = merged ? merge(*merged, piece) : piece;
    }
    ca.approx = *merged;
    for (std::size_t cell = 0; cell < grid.size(); ++cell) {
      if (opt.run_balls && box_meets_balls(grid.cell(cell), ca.approx, opt.intersection)) {
        rep.balls.push_back({source.id, ci, cell});
      }
      if (opt.run_halfspaces &&
          box_meets_halfspaces(grid.cell(cell), ca.approx, opt.intersection)) {
        rep.halfspaces.push_back({source.id, ci, cell});
      }
    }
    rep.approximations.push_back(std::move(ca));
  }
  std::sort(rep.balls.begin(), rep.balls.end());
  std::sort(rep.halfspaces.begin(), rep.halfspaces.end());
  if (opt.run_balls && opt.run_halfspaces) {
    const std::set<Transition> ball_set(rep.balls.begin(), rep.balls.end());
    for (const auto& tr : rep.halfspaces) {
      if (!ball_set.count(tr)) ++rep.spurious_eliminated;
    }
  }
  return rep;
}

inline TransitionReport pendulum_abstraction_step(const CellGrid& grid, const SourceRegion& source,
                                                  const std::vector<double>& controls,
                                                  const PendulumParams& base, double horizon,
                                                  const AbstractionOptions& opt = {}) {
  auto field_for = [base](double u) {
    PendulumParams p = base;
    p.u = u;
    return pendulum_field(p);
  };
  auto radius_for = [base, horizon](double s, double u) {
    // A singleton is r-convex for every r > 0.
    if (s == 0.0) return std::make_pair(std::optional<double>(1e-9), true);
    PendulumParams p = base;
    p.u = u;
    const PendulumRadius pr = pendulum_radius(p, s, horizon);
    return std::make_pair(pr.radius, pr.certified);
  };
  return abstraction_step(grid, source, controls, field_for, radius_for, horizon, opt);
}

// Identity dynamics: the attainable set is the source itself, radius s.
inline TransitionReport zero_field_abstraction_step(const CellGrid& grid,
                                                    const SourceRegion& source,
                                                    const std::vector<double>& controls,
                                                    double horizon,
                                                    const AbstractionOptions& opt = {}) {
  const int dim = grid.cell(0).dim();
  auto field_for = [dim](double) { return VectorField::zero(dim); };
  auto radius_for = [](double s, double) {
    return std::make_pair(std::optional<double>(s > 0.0 ? s : 1e-9), true);
  };
  return abstraction_step(grid, source, controls, field_for, radius_for, horizon, opt);
}

}  // namespace sconvex
