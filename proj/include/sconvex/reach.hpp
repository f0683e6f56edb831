#pragma once

// Flows of autonomous ODEs x' = F(x) together with their variational and
// adjoint equations, growth bounds of the Jacobian, the two radius formulas
// for strongly convex attainable sets, and supporting-ball
// over-approximations of attainable sets.

#include <sconvex/core.hpp>
#include <sconvex/geometry.hpp>
#include <sconvex/linalg.hpp>
#include <sconvex/polynomial.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <variant>

namespace sconvex {

struct VectorField {
  int dim = 0;
  std::string name;
  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> jac;
  // F''(x)h^2, present when F is C^2.
  std::function<Vec(const Vec&, const Vec&)> hess_quadform;
  // Bound on the Lipschitz constant of F' (spectral norm).
  std::optional<double> lipschitz_jac;
  std::optional<Box> domain;

  static VectorField zero(int dim) {
    VectorField vf;
    vf.dim = dim;
    vf.name = "zero";
    vf.f = [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
    vf.jac = [dim](const Vec&) { return Mat(Mat::Zero(dim, dim)); };
    vf.hess_quadform = [dim](const Vec&, const Vec&) { return Vec(Vec::Zero(dim)); };
    vf.lipschitz_jac = 0.0;
    return vf;
  }

  static VectorField linear(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("linear field needs a square matrix");
    VectorField vf;
    vf.dim = static_cast<int>(a.rows());
    vf.name = "linear";
    vf.f = [a](const Vec& x) { return Vec(a * x); };
    vf.jac = [a](const Vec&) { return a; };
    const int n = vf.dim;
    vf.hess_quadform = [n](const Vec&, const Vec&) { return Vec(Vec::Zero(n)); };
    vf.lipschitz_jac = 0.0;
    return vf;
  }

  // x' = (-x2, x1): counter-clockwise rotation with unit angular speed.
  static VectorField rotation() {
    Mat a(2, 2);
    a << 0.0, -1.0, 1.0, 0.0;
    VectorField vf = linear(a);
    vf.name = "rotation";
    return vf;
  }

  static VectorField from_polynomials(std::vector<Polynomial> comps) {
    if (comps.empty()) throw std::invalid_argument("polynomial field needs components");
    const int n = static_cast<int>(comps.size());
    for (const auto& p : comps) {
      if (p.dim() != n) {
        throw std::invalid_argument("polynomial field: each component must have dim " +
                                    std::to_string(n));
      }
    }
    auto shared = std::make_shared<const std::vector<Polynomial>>(std::move(comps));
    VectorField vf;
    vf.dim = n;
    vf.name = "polynomial";
    vf.f = [shared, n](const Vec& x) {
      Vec out(n);
      for (int i = 0; i < n; ++i) out[i] = (*shared)[static_cast<std::size_t>(i)].value(x);
      return out;
    };
    vf.jac = [shared, n](const Vec& x) {
      Mat out(n, n);
      for (int i = 0; i < n; ++i) {
        out.row(i) = (*shared)[static_cast<std::size_t>(i)].gradient(x).transpose();
      }
      return out;
    };
    vf.hess_quadform = [shared, n](const Vec& x, const Vec& h) {
      Vec out(n);
      for (int i = 0; i < n; ++i) {
        out[i] = (*shared)[static_cast<std::size_t>(i)].hessian_quadform(x, h);
      }
      return out;
    };
    return vf;
  }

  // The time-reversed field -F; its flow inverts the flow of F.
  VectorField reversed() const {
    VectorField vf = *this;
    vf.name = name + "-reversed";
    vf.f = [g = f](const Vec& x) { return Vec(-g(x)); };
    vf.jac = [g = jac](const Vec& x) { return Mat(-g(x)); };
    if (hess_quadform) {
      vf.hess_quadform = [g = hess_quadform](const Vec& x, const Vec& h) {
        return Vec(-g(x, h));
      };
    }
    return vf;
  }
};

// ---------------------------------------------------------------------------
// Flow with variational and adjoint equations
// ---------------------------------------------------------------------------

struct FlowBundle {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Mat> variational;  // D2 phi(t_k, x0); identity at t_0
  std::vector<Vec> adjoint;      // p(t_k), empty when no initial covector was given

  std::size_t size() const { return times.size(); }
  const Vec& final_state() const { return states.back(); }
  const Mat& final_variational() const { return variational.back(); }
  Vec unit_normal(std::size_t k) const { return adjoint.at(k).normalized(); }
};

namespace detail {

inline void check_domain(const VectorField& vf, const Vec& x, double t) {
  if (vf.domain && !vf.domain->contains(x)) {
    throw DomainExitError(t, "trajectory left the field's domain at t = " + std::to_string(t));
  }
  if (!x.allFinite()) throw DomainExitError(t, "trajectory diverged at t = " + std::to_string(t));
}

}  // namespace detail

/// Classical fixed-step RK4 on the joint system
///   x' = F(x),  Y' = F'(x) Y,  p' = -F'(x)^T p,  Y(0) = I.
inline FlowBundle flow(const VectorField& vf, const Vec& x0, double t, std::size_t steps,
                       const std::optional<Vec>& p0 = std::nullopt) {
  if (steps == 0) throw std::invalid_argument("flow: steps must be positive");
  if (x0.size() != vf.dim) throw std::invalid_argument("flow: initial state has wrong dimension");
  const int n = vf.dim;
  const double h = t / static_cast<double>(steps);
  const bool with_adjoint = p0.has_value();

  FlowBundle b;
  b.times.reserve(steps + 1);
  b.states.reserve(steps + 1);
  b.variational.reserve(steps + 1);
  Vec x = x0;
  Mat y = Mat::Identity(n, n);
  Vec p = with_adjoint ? *p0 : Vec();
  detail::check_domain(vf, x, 0.0);
  b.times.push_back(0.0);
  b.states.push_back(x);
  b.variational.push_back(y);
  if (with_adjoint) b.adjoint.push_back(p);

  for (std::size_t k = 0; k < steps; ++k) {
    const Mat j1 = vf.jac(x);
    const Vec k1 = vf.f(x);
    const Mat l1 = j1 * y;
    const Vec x2 = x + 0.5 * h * k1;
    const Mat j2 = vf.jac(x2);
    const Vec k2 = vf.f(x2);
    const Mat l2 = j2 * (y + 0.5 * h * l1);
    const Vec x3 = x + 0.5 * h * k2;
    const Mat j3 = vf.jac(x3);
    const Vec k3 = vf.f(x3);
    const Mat l3 = j3 * (y + 0.5 * h * l2);
    const Vec x4 = x + h * k3;
    const Mat j4 = vf.jac(x4);
    const Vec k4 = vf.f(x4);
    const Mat l4 = j4 * (y + h * l3);
    if (with_adjoint) {
      const Vec m1 = -j1.transpose() * p;
      const Vec m2 = -j2.transpose() * (p + 0.5 * h * m1);
      const Vec m3 = -j3.transpose() * (p + 0.5 * h * m2);
      const Vec m4 = -j4.transpose() * (p + h * m3);
      p += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    }
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    y += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    const double tk = h * static_cast<double>(k + 1);
    detail::check_domain(vf, x, tk);
    b.times.push_back(tk);
    b.states.push_back(x);
    b.variational.push_back(y);
    if (with_adjoint) b.adjoint.push_back(p);
  }
  return b;
}

// State-only RK4, for bulk sampling.
inline Vec integrate_state(const VectorField& vf, Vec x, double t, std::size_t steps) {
  const double h = t / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const Vec k1 = vf.f(x);
    const Vec k2 = vf.f(x + 0.5 * h * k1);
    const Vec k3 = vf.f(x + 0.5 * h * k2);
    const Vec k4 = vf.f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// Outward unit normal at the end of the flow: D2phi(t,x0)^{-T} v0, normalized.
inline Vec propagate_normal(const FlowBundle& bundle, const Vec& v0) {
  const Mat& y = bundle.final_variational();
  if (condition_number(y) > 1e12) {
    throw SingularVariationalError("variational matrix is numerically singular");
  }
  const Vec w = y.transpose().partialPivLu().solve(v0);
  return w.normalized();
}

// ---------------------------------------------------------------------------
// Growth bounds
// ---------------------------------------------------------------------------

struct GrowthBounds {
  double M1 = 0.0;  // >= 2 mu_+(F') - mu_-(F')
  double M2 = 0.0;  // Lipschitz bound of F'
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  Box domain;
  bool m2_heuristic = false;
  double m2_raw = 0.0;  // finite-difference maximum before the safety factor
};

struct BoundsGrid {
  std::size_t points_per_axis = 41;
  std::size_t max_grid_points = 200000;
  std::size_t m2_pairs = 2000;
  double m2_step = 1e-4;
  double m2_safety = 1.1;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<Vec> grid_points(const Box& box, const BoundsGrid& g) {
  const int n = box.dim();
  const double total = std::pow(static_cast<double>(g.points_per_axis), n);
  std::vector<Vec> pts;
  if (total > static_cast<double>(g.max_grid_points) || g.points_per_axis < 2) {
    Rng rng(g.seed);
    for (std::size_t k = 0; k < g.max_grid_points; ++k) pts.push_back(rng.uniform_in(box));
    return pts;
  }
  const auto count = static_cast<std::size_t>(total);
  for (std::size_t idx = 0; idx < count; ++idx) {
    Vec x(n);
    std::size_t rem = idx;
    for (int d = 0; d < n; ++d) {
      const std::size_t i = rem % g.points_per_axis;
      rem /= g.points_per_axis;
      x[d] = box.lower[d] + box.extent()[d] * static_cast<double>(i) /
                                static_cast<double>(g.points_per_axis - 1);
    }
    pts.push_back(x);
  }
  return pts;
}

}  // namespace detail

/// lambda_+- extremize the symmetric-part eigenvalues of F' over the grid;
/// M1 is the largest 2 mu_+ - mu_-; M2 comes from `lipschitz_jac` when given,
/// otherwise from finite differences of F' inflated by a safety factor.
inline GrowthBounds estimate_bounds(const VectorField& vf, const Box& box,
                                    const BoundsGrid& grid = {}) {
  GrowthBounds b;
  b.domain = box;
  b.lambda_plus = -kInf;
  b.lambda_minus = kInf;
  b.M1 = -kInf;
  for (const Vec& x : detail::grid_points(box, grid)) {
    const SpectrumRange r = symmetric_part_extremes(vf.jac(x));
    b.lambda_plus = std::max(b.lambda_plus, r.max);
    b.lambda_minus = std::min(b.lambda_minus, r.min);
    b.M1 = std::max(b.M1, 2.0 * r.max - r.min);
  }
  if (vf.lipschitz_jac) {
    b.M2 = *vf.lipschitz_jac;
    b.m2_raw = b.M2;
  } else {
    Rng rng(derive_seed(grid.seed, 0x32));
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.m2_pairs; ++k) {
      const Vec x = rng.uniform_in(box);
      const Vec h = grid.m2_step * rng.unit_vector(box.dim());
      worst = std::max(worst, spectral_norm(vf.jac(x + h) - vf.jac(x)) / h.norm());
    }
    b.m2_raw = worst;
    b.M2 = grid.m2_safety * worst;
    b.m2_heuristic = true;
  }
  return b;
}

// Bounding box of the trajectories from `points` over [0, t], inflated.
inline Box trajectory_hull(const VectorField& vf, const std::vector<Vec>& points, double t,
                           std::size_t steps, double safety = 0.1) {
  if (points.empty()) throw std::invalid_argument("trajectory_hull: no points");
  Vec lo = points.front();
  Vec hi = points.front();
  for (const Vec& x0 : points) {
    const FlowBundle b = flow(vf, x0, t, steps);
    for (const Vec& x : b.states) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
  }
  return Box(lo, hi).inflated(safety, 1e-9);
}

// ---------------------------------------------------------------------------
// Radius formulas
// ---------------------------------------------------------------------------

/// C^{1,1} case: s exp((2 l+ - l-) t) / (1 - s M2 I) with I = int_0^t exp(M1 rho) d rho.
/// Empty when s M2 I >= 1.
inline std::optional<double> radius_c11(double s, double t, const GrowthBounds& b) {
  if (!(s > 0.0) || !(t > 0.0)) throw std::invalid_argument("radius_c11: s and t must be positive");
  const double integral =
      std::abs(b.M1) < 1e-12 ? t : std::expm1(b.M1 * t) / b.M1;
  const double load = s * b.M2 * integral;
  if (load >= 1.0) return std::nullopt;
  return s * std::exp((2.0 * b.lambda_plus - b.lambda_minus) * t) / (1.0 - load);
}

/// C^2 case: s exp((2 l+ - l-) t) / (1 - s L1). Empty when s L1 >= 1.
inline std::optional<double> radius_c2(double s, double t, double l1, const GrowthBounds& b) {
  if (!(s > 0.0) || !(t > 0.0)) throw std::invalid_argument("radius_c2: s and t must be positive");
  if (!(l1 >= 0.0)) throw std::invalid_argument("radius_c2: L1 must be nonnegative");
  if (s * l1 >= 1.0) return std::nullopt;
  return s * std::exp((2.0 * b.lambda_plus - b.lambda_minus) * t) / (1.0 - s * l1);
}

/// Largest norm of  int_0^delta D2phi^{-1} F''(phi) (D2phi h)^2 d tau  found over
/// the sampled initial points, unit directions h and grid times delta
/// (trapezoid rule on the flow grid). A sampled lower estimate of L1.
inline double l1_empirical(const VectorField& vf, const std::vector<Vec>& omega_samples, double t,
                           std::size_t h_samples, std::size_t steps = 256) {
  if (!vf.hess_quadform) throw UnsupportedError("l1_empirical requires a C^2 field");
  const auto dirs = unit_directions(vf.dim, h_samples);
  double best = 0.0;
  for (const Vec& x : omega_samples) {
    const FlowBundle b = flow(vf, x, t, steps);
    std::vector<Mat> inv;
    inv.reserve(b.size());
    for (const Mat& y : b.variational) inv.push_back(y.inverse());
    for (const Vec& h : dirs) {
      Vec acc = Vec::Zero(vf.dim);
      Vec prev = inv[0] * vf.hess_quadform(b.states[0], b.variational[0] * h);
      for (std::size_t k = 1; k < b.size(); ++k) {
        const Vec cur = inv[k] * vf.hess_quadform(b.states[k], b.variational[k] * h);
        acc += 0.5 * (b.times[k] - b.times[k - 1]) * (prev + cur);
        best = std::max(best, acc.norm());
        prev = cur;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Supporting-ball over-approximation
// ---------------------------------------------------------------------------

using InitialSet = std::variant<Ball, BallIntersection>;

// Dykstra's alternating projection onto an intersection of convex pieces.
inline Vec dykstra(const std::vector<std::function<Vec(const Vec&)>>& projectors, const Vec& z,
                   int iterations = 2000, double tol = 1e-13) {
  Vec x = z;
  std::vector<Vec> incr(projectors.size(), Vec::Zero(z.size()));
  for (int it = 0; it < iterations; ++it) {
    const Vec start = x;
    double change = 0.0;
    for (std::size_t i = 0; i < projectors.size(); ++i) {
      const Vec y = projectors[i](x + incr[i]);
      incr[i] = x + incr[i] - y;
      change += (y - x).squaredNorm();
      x = y;
    }
    if ((x - start).norm() <= tol && std::sqrt(change) <= tol) break;
  }
  return x;
}

inline std::vector<std::function<Vec(const Vec&)>> ball_projectors(const BallIntersection& k) {
  std::vector<std::function<Vec(const Vec&)>> ps;
  for (const auto& patch : k.patches) {
    const Ball b = supporting_ball(patch);
    ps.push_back([b](const Vec& z) {
      const Vec d = z - b.center;
      const double n = d.norm();
      return n <= b.radius ? z : Vec(b.center + (b.radius / n) * d);
    });
  }
  return ps;
}

inline std::vector<std::function<Vec(const Vec&)>> halfspace_projectors(const BallIntersection& k) {
  std::vector<std::function<Vec(const Vec&)>> ps;
  for (const auto& patch : k.patches) {
    ps.push_back([patch](const Vec& z) {
      const double e = patch.normal.dot(z - patch.point);
      return e <= 0.0 ? z : Vec(z - e * patch.normal);
    });
  }
  return ps;
}

inline Vec project_onto_ball_intersection(const BallIntersection& k, const Vec& z) {
  return dykstra(ball_projectors(k), z);
}

/// Maximizer of <v, x> over the ball intersection by projected ascent.
inline Vec support_point(const BallIntersection& k, const Vec& v, int iterations = 50,
                         double tol = 1e-10) {
  Vec centroid = Vec::Zero(k.dim());
  for (const auto& p : k.patches) centroid += p.point;
  centroid /= static_cast<double>(k.patches.size());
  const double step = 10.0 * k.min_radius();
  Vec x = project_onto_ball_intersection(k, centroid);
  for (int it = 0; it < iterations; ++it) {
    const Vec next = project_onto_ball_intersection(k, x + step * v);
    const double moved = (next - x).norm();
    x = next;
    if (moved <= tol) break;
  }
  return x;
}

inline Vec support_point(const InitialSet& init, const Vec& v) {
  if (const auto* b = std::get_if<Ball>(&init)) return b->center + b->radius * v;
  return support_point(std::get<BallIntersection>(init), v);
}

struct ReachOptions {
  std::size_t directions = 16;
  std::size_t steps = 1024;
  double angle_offset = 0.0;
};

/// Supporting-ball over-approximation of phi(t, init): for each sampled
/// outward normal v0 the support point x0 of `init` is flowed, v0 is carried
/// along by the adjoint equation, and a ball of radius r is placed at the
/// image. `r` comes from radius_c11 / radius_c2; empty means infeasible.
inline BallIntersection reach_overapprox(const VectorField& vf, const InitialSet& init, double s,
                                         double t, std::optional<double> r,
                                         const ReachOptions& opt = {}) {
  if (!r) throw InfeasibleRadiusError("no feasible radius for the attainable set");
  if (!(*r > 0.0)) throw InfeasibleRadiusError("radius must be positive");
  const auto normals = unit_directions(vf.dim, opt.directions, opt.angle_offset);

  if (s == 0.0) {
    const auto* b = std::get_if<Ball>(&init);
    const Vec x0 = b ? b->center : std::get<BallIntersection>(init).patches.front().point;
    const FlowBundle fb = flow(vf, x0, t, opt.steps, normals.front());
    return BallIntersection({SupportPatch(fb.final_state(), propagate_normal(fb, normals.front()), *r)});
  }

  std::vector<SupportPatch> patches;
  patches.reserve(normals.size());
  for (const Vec& v0 : normals) {
    const Vec x0 = support_point(init, v0);
    const FlowBundle fb = flow(vf, x0, t, opt.steps, v0);
    patches.emplace_back(fb.final_state(), propagate_normal(fb, v0), *r);
  }
  return BallIntersection(std::move(patches));
}

}  // namespace sconvex
