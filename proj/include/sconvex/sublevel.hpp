#pragma once

// Sublevel sets {x in box | g_1(x) <= 0, ..., g_m(x) <= 0} and local
// second-order certificates for their convexity and r-convexity.
//
// Every certificate here is a numerical statement at finite resolution: the
// boundary is sampled, the cone of admissible directions is sampled, and the
// generalized second derivative is estimated on a geometric t-schedule when
// no exact Hessian is available. Connectedness of the set is assumed and
// never verified; each certificate carries that caveat.

#include <sconvex/core.hpp>
#include <sconvex/geometry.hpp>
#include <sconvex/linalg.hpp>
#include <sconvex/polynomial.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace sconvex {

// ---------------------------------------------------------------------------
// Constraint functions
// ---------------------------------------------------------------------------

struct ConstraintFunction {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  // Exact g''(x)h^2 when g is C^2; empty otherwise.
  std::function<double(const Vec&, const Vec&)> hessian_quadform;
  std::optional<double> lipschitz_hint;

  bool has_exact_hessian() const { return static_cast<bool>(hessian_quadform); }

  static ConstraintFunction from_polynomial(Polynomial p, std::string name = "poly") {
    auto shared = std::make_shared<const Polynomial>(std::move(p));
    ConstraintFunction g;
    g.name = std::move(name);
    g.value = [shared](const Vec& x) { return shared->value(x); };
    g.gradient = [shared](const Vec& x) { return shared->gradient(x); };
    g.hessian_quadform = [shared](const Vec& x, const Vec& h) {
      return shared->hessian_quadform(x, h);
    };
    return g;
  }

  // Same function with the exact Hessian hidden, forcing the schedule path.
  ConstraintFunction without_hessian() const {
    ConstraintFunction g = *this;
    g.hessian_quadform = nullptr;
    return g;
  }

  ConstraintFunction negated() const {
    ConstraintFunction g;
    g.name = "-" + name;
    g.value = [f = value](const Vec& x) { return -f(x); };
    g.gradient = [f = gradient](const Vec& x) { return Vec(-f(x)); };
    if (hessian_quadform) {
      g.hessian_quadform = [f = hessian_quadform](const Vec& x, const Vec& h) {
        return -f(x, h);
      };
    }
    g.lipschitz_hint = lipschitz_hint;
    return g;
  }
};

struct DerivativeCheck {
  double gradient_rel_error = 0.0;
  double hessian_rel_error = 0.0;
  bool gradient_ok = true;
  bool hessian_ok = true;
};

// Compares the supplied gradient (and Hessian quadratic form, when present)
// against central differences at random points of `box`.
inline DerivativeCheck check_derivatives(const ConstraintFunction& g, const Box& box,
                                         std::size_t probes = 32, std::uint64_t seed = 3) {
  DerivativeCheck out;
  Rng rng(seed);
  const int n = box.dim();
  const double eps1 = 1e-6;
  const double eps2 = 1e-4;
  for (std::size_t k = 0; k < probes; ++k) {
    const Vec x = rng.uniform_in(box);
    const Vec grad = g.gradient(x);
    Vec fd(n);
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e[i] = eps1;
      fd[i] = (g.value(x + e) - g.value(x - e)) / (2.0 * eps1);
    }
    const double scale = std::max(1.0, grad.norm());
    out.gradient_rel_error = std::max(out.gradient_rel_error, (fd - grad).norm() / scale);
    if (g.hessian_quadform) {
      const Vec h = rng.unit_vector(n);
      const double exact = g.hessian_quadform(x, h);
      const double second =
          (g.value(x + eps2 * h) - 2.0 * g.value(x) + g.value(x - eps2 * h)) / (eps2 * eps2);
      out.hessian_rel_error =
          std::max(out.hessian_rel_error, std::abs(second - exact) / std::max(1.0, std::abs(exact)));
    }
  }
  out.gradient_ok = out.gradient_rel_error <= 1e-5;
  out.hessian_ok = out.hessian_rel_error <= 1e-4;
  return out;
}

// ---------------------------------------------------------------------------
// Sublevel sets
// ---------------------------------------------------------------------------

struct SublevelSet {
  std::vector<ConstraintFunction> constraints;
  Box domain_box;

  SublevelSet() = default;
  SublevelSet(std::vector<ConstraintFunction> gs, Box box)
      : constraints(std::move(gs)), domain_box(std::move(box)) {
    if (constraints.empty()) throw std::invalid_argument("SublevelSet: no constraints");
  }

  int dim() const { return domain_box.dim(); }
  std::size_t size() const { return constraints.size(); }

  double max_value(const Vec& x) const {
    double m = -kInf;
    for (const auto& g : constraints) m = std::max(m, g.value(x));
    return m;
  }

  bool contains(const Vec& x, double tol = 0.0) const {
    return domain_box.contains(x) && max_value(x) <= tol;
  }
};

struct ToleranceConfig {
  double active = 1e-9;       // |g_i(x)| <= active  =>  i is active
  double cone_margin = 1e-9;  // interior of the cone needs LP value above this
  double inequality = 1e-9;   // slack allowed in the second-order inequalities
  double rank = 1e-8;         // singular-value threshold for independence
  double cone_filter = 1e-10; // g_j'(x)h <= cone_filter*|g_j'| keeps h in the cone
  double boundary = 1e-7;     // membership flip resolution for black-box sets
};

inline MembershipPredicate as_predicate(const SublevelSet& s, double tol = 1e-9) {
  MembershipPredicate p;
  p.bounds = s.domain_box;
  p.contains = [s, tol](const Vec& x) { return s.contains(x, tol); };
  return p;
}

namespace detail {

// Least-norm Gauss-Newton correction driving the selected constraints to zero.
inline Vec project_onto_constraints(const SublevelSet& s, Vec x,
                                    const std::function<bool(std::size_t, double)>& select,
                                    int iterations = 50) {
  const int n = s.dim();
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (select(i, s.constraints[i].value(x))) idx.push_back(i);
    }
    if (idx.empty()) break;
    Mat jac(static_cast<Eigen::Index>(idx.size()), n);
    Vec res(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      jac.row(r) = s.constraints[idx[k]].gradient(x).transpose();
      res[r] = s.constraints[idx[k]].value(x);
    }
    if (res.cwiseAbs().maxCoeff() < 1e-15) break;
    const Vec dx = jac.completeOrthogonalDecomposition().solve(res);
    x -= dx;
    if (dx.norm() < 1e-16 * std::max(1.0, x.norm())) break;
  }
  return x;
}

}  // namespace detail

// Draws points of the set by projecting uniform box samples onto the violated
// constraints. Works for sets of measure zero such as a circle written as two
// opposite inequalities.
inline std::function<Vec(Rng&)> constraint_projection_sampler(const SublevelSet& s,
                                                              double tol = 1e-9) {
  return [s, tol](Rng& rng) {
    Vec x = rng.uniform_in(s.domain_box);
    return detail::project_onto_constraints(
        s, x, [tol](std::size_t, double v) { return v > 0.1 * tol; });
  };
}

// ---------------------------------------------------------------------------
// Active sets and the linearized cone
// ---------------------------------------------------------------------------

inline std::vector<std::size_t> active_set(const SublevelSet& s, const Vec& x, double tol) {
  std::vector<std::size_t> act;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s.constraints[i].value(x);
    if (v > tol) {
      std::ostringstream os;
      os << "point violates constraint " << i << " (g = " << v << ")";
      throw NotInSetError(os.str());
    }
    if (std::abs(v) <= tol) act.push_back(i);
  }
  return act;
}

struct ActiveCone {
  std::vector<std::size_t> active_indices;
  std::vector<Vec> cone_generators;  // gradients of the active constraints
  bool interior_nonempty = false;
  std::optional<Vec> interior_direction;
  double lp_value = 0.0;
};

/// Tests whether {h : g_j'(x)h <= 0 for active j} has interior by solving
/// max t  s.t.  g_j'(x)p <= -t,  |p|_inf <= 1.
inline ActiveCone interior_cone(const SublevelSet& s, const Vec& x,
                                const ToleranceConfig& tol = {}) {
  ActiveCone cone;
  cone.active_indices = active_set(s, x, tol.active);
  for (std::size_t i : cone.active_indices) {
    cone.cone_generators.push_back(s.constraints[i].gradient(x));
  }
  const auto [t, p] = interior_direction_lp(cone.cone_generators, s.dim());
  cone.lp_value = t;
  cone.interior_nonempty = t > tol.cone_margin;
  if (cone.interior_nonempty) cone.interior_direction = p;
  return cone;
}

// ---------------------------------------------------------------------------
// Generalized second directional derivatives
// ---------------------------------------------------------------------------

struct TSchedule {
  double t0 = 1e-2;
  double beta = 0.5;
  int steps = 20;

  double at(int k) const { return t0 * std::pow(beta, k); }
};

struct SecondDerivative {
  double value = 0.0;          // exact g''(x)h^2, or the schedule minimum
  double last_quotient = 0.0;  // quotient at the smallest t
  bool exact = false;
};

namespace detail {

inline double fit_schedule_start(const Vec& x, const Vec& h, double t0, const Box* box) {
  if (box == nullptr) return t0;
  double t = t0;
  for (int k = 0; k < 60 && !box->contains(x + t * h); ++k) t *= 0.5;
  // A step too small to move x in floating point is no step at all.
  if (!box->contains(x + t * h) || x + t * h == x) {
    throw DomainError("direction leaves the domain box for every schedule step");
  }
  return t;
}

}  // namespace detail

/// Lower second directional derivative
///   liminf_{t->0+} (g'(x+th)h - g'(x)h) / t,
/// exact for C^2 functions, otherwise the minimum over t_k = t0*beta^k.
inline SecondDerivative dir_second_lower(const ConstraintFunction& g, const Vec& x, const Vec& h,
                                         const TSchedule& sched = {},
                                         const Box* box = nullptr) {
  SecondDerivative out;
  if (g.hessian_quadform) {
    out.value = g.hessian_quadform(x, h);
    out.last_quotient = out.value;
    out.exact = true;
    return out;
  }
  const double t0 = detail::fit_schedule_start(x, h, sched.t0, box);
  const double base = g.gradient(x).dot(h);
  out.value = kInf;
  for (int k = 0; k < sched.steps; ++k) {
    const double t = t0 * std::pow(sched.beta, k);
    const double q = (g.gradient(x + t * h).dot(h) - base) / t;
    out.value = std::min(out.value, q);
    out.last_quotient = q;
  }
  return out;
}

struct MaxFunctionEstimate {
  double upper = 0.0;        // schedule estimate of the upper second derivative of max f_i
  double lower_bound = 0.0;  // max over the argmax set M of the lower second derivatives
  std::vector<std::size_t> active;  // I(x): indices attaining the maximum
  std::vector<std::size_t> argmax;  // M: indices in I(x) with the largest slope along h
};

namespace detail {

inline std::vector<std::size_t> attaining_max(const std::vector<double>& vals) {
  double m = -kInf;
  for (double v : vals) m = std::max(m, v);
  const double tie = 1e-12 * (1.0 + std::abs(m));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] >= m - tie) idx.push_back(i);
  }
  return idx;
}

// One-sided directional derivative of max_i f_i at y along h.
inline double max_directional(const std::vector<ConstraintFunction>& fs, const Vec& y,
                              const Vec& h) {
  std::vector<double> vals;
  vals.reserve(fs.size());
  for (const auto& f : fs) vals.push_back(f.value(y));
  double best = -kInf;
  for (std::size_t i : attaining_max(vals)) best = std::max(best, fs[i].gradient(y).dot(h));
  return best;
}

}  // namespace detail

/// Estimates the upper second directional derivative of f = max_i f_i and the
/// lower bound max_{i in M} of the lower second derivatives of the f_i,
/// with M the indices of I(x) whose slope along h is maximal.
inline MaxFunctionEstimate max_dir_second_upper(const std::vector<ConstraintFunction>& fs,
                                                const Vec& x, const Vec& h,
                                                const TSchedule& sched = {}) {
  if (fs.empty()) throw std::invalid_argument("max_dir_second_upper: no functions");
  MaxFunctionEstimate out;
  std::vector<double> vals;
  for (const auto& f : fs) vals.push_back(f.value(x));
  out.active = detail::attaining_max(vals);

  std::vector<double> slopes;
  for (std::size_t i : out.active) slopes.push_back(fs[i].gradient(x).dot(h));
  for (std::size_t k : detail::attaining_max(slopes)) out.argmax.push_back(out.active[k]);

  const double base = detail::max_directional(fs, x, h);
  out.upper = -kInf;
  for (int k = 0; k < sched.steps; ++k) {
    const double t = sched.at(k);
    out.upper = std::max(out.upper, (detail::max_directional(fs, x + t * h, h) - base) / t);
  }
  out.lower_bound = -kInf;
  for (std::size_t i : out.argmax) {
    out.lower_bound = std::max(out.lower_bound, dir_second_lower(fs[i], x, h, sched).value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary sampling
// ---------------------------------------------------------------------------

class BoundarySampler {
 public:
  using Fn = std::function<std::vector<Vec>(const SublevelSet&, const ToleranceConfig&)>;

  explicit BoundarySampler(Fn fn) : fn_(std::move(fn)) {}

  std::vector<Vec> sample(const SublevelSet& s, const ToleranceConfig& tol = {}) const {
    return fn_(s, tol);
  }

  static std::size_t default_count(int dim) { return dim <= 2 ? 256 : 1024; }

  /// Rays from an interior seed (the box center when it is interior, else the
  /// supplied seed, else a rejection-sampled interior point), bisected to the
  /// boundary and polished onto the nearly-active constraints.
  static BoundarySampler rays(std::size_t count, std::uint64_t seed,
                              std::optional<Vec> seed_point = std::nullopt);

  /// A fixed list of points, each polished onto its nearly-active constraints.
  static BoundarySampler points(std::vector<Vec> pts);

 private:
  Fn fn_;
};

namespace detail {

inline Vec polish_boundary_point(const SublevelSet& s, const Vec& x) {
  const double near = 1e-6;
  const Vec y = project_onto_constraints(
      s, x, [near](std::size_t, double v) { return std::abs(v) <= near; }, 30);
  if ((y - x).norm() > 1e-5) return x;
  return y;
}

inline std::optional<Vec> interior_seed(const SublevelSet& s, const std::optional<Vec>& hint,
                                        Rng& rng) {
  const Vec c = s.domain_box.center();
  if (s.domain_box.contains(c) && s.max_value(c) < 0.0) return c;
  if (hint && s.domain_box.contains(*hint) && s.max_value(*hint) < 0.0) return hint;
  for (int k = 0; k < 100000; ++k) {
    const Vec x = rng.uniform_in(s.domain_box);
    if (s.max_value(x) < 0.0) return x;
  }
  return std::nullopt;
}

}  // namespace detail

inline BoundarySampler BoundarySampler::points(std::vector<Vec> pts) {
  return BoundarySampler([pts = std::move(pts)](const SublevelSet& s, const ToleranceConfig&) {
    std::vector<Vec> out;
    out.reserve(pts.size());
    for (const Vec& x : pts) out.push_back(detail::polish_boundary_point(s, x));
    return out;
  });
}

inline BoundarySampler BoundarySampler::rays(std::size_t count, std::uint64_t seed,
                                             std::optional<Vec> seed_point) {
  return BoundarySampler([count, seed, seed_point](const SublevelSet& s,
                                                   const ToleranceConfig&) {
    Rng rng(seed);
    const auto origin = detail::interior_seed(s, seed_point, rng);
    if (!origin) throw BoundarySamplingError("no interior seed point found for boundary rays");
    const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const auto dirs = unit_directions(s.dim(), count, offset, derive_seed(seed, 1));
    const double tol = 1e-13 * std::max(1.0, s.domain_box.diagonal());
    std::vector<Vec> out;
    for (const Vec& u : dirs) {
      const double t_max = s.domain_box.exit_distance(*origin, u);
      if (s.contains(*origin + t_max * u)) continue;  // hits the box, not a constraint
      double lo = 0.0;
      double hi = t_max;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (s.contains(*origin + mid * u)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      out.push_back(detail::polish_boundary_point(s, *origin + lo * u));
    }
    if (out.empty()) throw BoundarySamplingError("no boundary points found");
    return out;
  });
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

enum class CertificateKind {
  kConvexSufficient,
  kRConvexSufficientExists,  // some active index satisfies the inequality, CQ required
  kRConvexSufficientAll,     // every active index satisfies it, no CQ needed
  kNecessaryHolds,
  kNecessaryViolation,
};

inline std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::kConvexSufficient: return "convex-sufficient";
    case CertificateKind::kRConvexSufficientExists: return "r-convex-sufficient-(i)";
    case CertificateKind::kRConvexSufficientAll: return "r-convex-sufficient-(ii)";
    case CertificateKind::kNecessaryHolds: return "necessary-holds";
    case CertificateKind::kNecessaryViolation: return "necessary-violation";
  }
  return "unknown";
}

struct CertificateWitness {
  Vec x;
  std::optional<std::size_t> index;
  Vec h;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string condition;  // "inequality", "cq", "degenerate-gradient"
};

struct Certificate {
  CertificateKind kind = CertificateKind::kConvexSufficient;
  bool pass = true;
  std::size_t boundary_points_checked = 0;
  std::size_t points_failed = 0;
  std::size_t cq_failures = 0;
  std::size_t points_skipped = 0;
  double worst_margin = kInf;
  std::vector<double> index_worst_margin;  // per constraint, over all points where it was active
  std::vector<CertificateWitness> witnesses;
  std::optional<double> radius;
  std::vector<std::string> caveats;
  std::vector<std::string> notes;

  static constexpr std::size_t kMaxWitnesses = 64;
  static constexpr std::size_t kMaxNotes = 16;
};

struct CertifyOptions {
  ToleranceConfig tol;
  TSchedule schedule;
  std::size_t directions = 64;
  std::uint64_t seed = 1;
};

enum class RConvexMode { kExistsIndex, kAllIndices };

// Unit directions in C(x) ∩ ker g_i'(x): sampled directions of the kernel plus
// the basis of the joint kernel of all active gradients, filtered by the cone.
inline std::vector<Vec> cone_kernel_directions(const std::vector<Vec>& active_grads,
                                               std::size_t which, std::size_t count,
                                               double filter_tol, std::uint64_t seed) {
  const Vec& gi = active_grads[which];
  const int n = static_cast<int>(gi.size());
  const Mat basis = kernel_basis(gi);
  const int k = static_cast<int>(basis.cols());
  std::vector<Vec> cand;
  if (k == 1) {
    cand.push_back(basis.col(0));
    cand.push_back(-basis.col(0));
  } else if (k > 1) {
    Rng rng(seed);
    const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (const Vec& w : unit_directions(k, count, offset, seed)) cand.push_back(basis * w);
  }
  Mat rows(static_cast<Eigen::Index>(active_grads.size()), n);
  for (std::size_t j = 0; j < active_grads.size(); ++j) {
    rows.row(static_cast<Eigen::Index>(j)) = active_grads[j].transpose();
  }
  const Mat joint = null_space(rows);
  for (Eigen::Index c = 0; c < joint.cols(); ++c) {
    cand.push_back(joint.col(c));
    cand.push_back(-joint.col(c));
  }
  std::vector<Vec> out;
  for (const Vec& h : cand) {
    bool in_cone = true;
    for (const Vec& gj : active_grads) {
      if (gj.dot(h) > filter_tol * std::max(1.0, gj.norm())) {
        in_cone = false;
        break;
      }
    }
    if (in_cone) out.push_back(h);
  }
  return out;
}

namespace detail {

struct IndexCheck {
  double margin = kInf;  // min over sampled h of lhs - rhs
  std::optional<CertificateWitness> worst;
};

// Checks  D2_lower g_i(x,h^2) >= (1/r)|g_i'(x)| |h|^2  over sampled h.
inline IndexCheck check_index(const SublevelSet& s, const Vec& x,
                              const std::vector<std::size_t>& active,
                              const std::vector<Vec>& grads, std::size_t pos, double r,
                              const CertifyOptions& opt, std::uint64_t seed) {
  IndexCheck out;
  const std::size_t i = active[pos];
  const double gnorm = grads[pos].norm();
  if (gnorm == 0.0) {
    out.margin = -kInf;
    out.worst = CertificateWitness{x, i, Vec::Zero(x.size()), 0.0, 0.0, "degenerate-gradient"};
    return out;
  }
  const auto dirs = cone_kernel_directions(grads, pos, opt.directions, opt.tol.cone_filter, seed);
  for (const Vec& h : dirs) {
    const double lhs =
        dir_second_lower(s.constraints[i], x, h, opt.schedule, &s.domain_box).value;
    const double rhs = std::isinf(r) ? 0.0 : gnorm * h.squaredNorm() / r;
    if (lhs - rhs < out.margin) {
      out.margin = lhs - rhs;
      out.worst = CertificateWitness{x, i, h, lhs, rhs, "inequality"};
    }
  }
  return out;
}

inline void add_witness(Certificate& c, CertificateWitness w) {
  if (c.witnesses.size() < Certificate::kMaxWitnesses) c.witnesses.push_back(std::move(w));
}

inline void add_note(Certificate& c, std::string note) {
  if (c.notes.size() < Certificate::kMaxNotes) c.notes.push_back(std::move(note));
}

inline std::string format_point(const Vec& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << ")";
  return os.str();
}

inline std::vector<std::string> standard_caveats() {
  return {"connectedness assumed, not verified", "sampled boundary and directions"};
}

// Shared driver for the sufficient conditions. `r = kInf` is ordinary convexity.
inline Certificate certify_sufficient(const SublevelSet& s, double r, bool require_cq,
                                      bool all_indices, const BoundarySampler& boundary,
                                      const CertifyOptions& opt) {
  Certificate cert;
  cert.kind = std::isinf(r) ? CertificateKind::kConvexSufficient
              : all_indices ? CertificateKind::kRConvexSufficientAll
                            : CertificateKind::kRConvexSufficientExists;
  if (!std::isinf(r)) cert.radius = r;
  cert.caveats = standard_caveats();
  cert.index_worst_margin.assign(s.size(), kInf);

  const auto pts = boundary.sample(s, opt.tol);
  if (pts.empty()) throw BoundarySamplingError("boundary sampler returned no points");

  for (std::size_t pi = 0; pi < pts.size(); ++pi) {
    const Vec& x = pts[pi];
    const ActiveCone cone = interior_cone(s, x, opt.tol);
    if (cone.active_indices.empty()) {
      ++cert.points_skipped;
      add_note(cert, "no active constraint at " + format_point(x) + "; skipped");
      continue;
    }
    ++cert.boundary_points_checked;
    bool point_ok = true;
    if (require_cq && !cone.interior_nonempty) {
      ++cert.cq_failures;
      point_ok = false;
      add_witness(cert, CertificateWitness{x, std::nullopt, Vec::Zero(x.size()),
                                           cone.lp_value, opt.tol.cone_margin, "cq"});
    }

    double point_margin = all_indices ? kInf : -kInf;
    std::optional<CertificateWitness> worst;
    bool accepted = false;
    for (std::size_t pos = 0; pos < cone.active_indices.size(); ++pos) {
      const IndexCheck ic = check_index(s, x, cone.active_indices, cone.cone_generators, pos,
                                        r, opt, derive_seed(opt.seed, pi));
      const std::size_t i = cone.active_indices[pos];
      cert.index_worst_margin[i] = std::min(cert.index_worst_margin[i], ic.margin);
      const bool ok = ic.margin >= -opt.tol.inequality;
      if (all_indices) {
        if (ic.margin < point_margin) {
          point_margin = ic.margin;
          worst = ic.worst;
        }
      } else if (!accepted) {
        if (ok) {
          accepted = true;
          point_margin = ic.margin;
        } else if (ic.margin > point_margin) {
          point_margin = ic.margin;
          worst = ic.worst;
        }
      }
    }
    if (point_margin < -opt.tol.inequality) {
      point_ok = false;
      if (worst) add_witness(cert, *worst);
    }
    cert.worst_margin = std::min(cert.worst_margin, point_margin);
    if (!point_ok) ++cert.points_failed;
  }
  cert.pass = cert.points_failed == 0 && cert.boundary_points_checked > 0;
  return cert;
}

}  // namespace detail

/// Sufficient condition for convexity: at each sampled boundary point the cone
/// has interior and some active g_i has nonnegative second derivative along
/// every direction of the cone within ker g_i'(x).
inline Certificate certify_convexity(const SublevelSet& s, const BoundarySampler& boundary,
                                     const CertifyOptions& opt = {}) {
  return detail::certify_sufficient(s, kInf, true, false, boundary, opt);
}

/// Sufficient conditions for r-convexity. kExistsIndex requires the cone
/// interior and one passing index per point; kAllIndices needs no cone
/// condition but every active index must pass.
inline Certificate certify_r_convexity(const SublevelSet& s, double r, RConvexMode mode,
                                       const BoundarySampler& boundary,
                                       const CertifyOptions& opt = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("certify_r_convexity: r must be positive");
  const bool all = mode == RConvexMode::kAllIndices;
  return detail::certify_sufficient(s, r, !all, all, boundary, opt);
}

/// Necessary conditions: given that the set is convex (r empty) or r-convex,
/// every active index must satisfy the inequality at boundary points whose
/// active gradients are linearly independent. Other points are skipped.
inline Certificate check_necessary(const SublevelSet& s, std::optional<double> r,
                                   const BoundarySampler& boundary,
                                   const CertifyOptions& opt = {}) {
  Certificate cert;
  cert.kind = CertificateKind::kNecessaryHolds;
  cert.radius = r;
  cert.caveats = detail::standard_caveats();
  cert.index_worst_margin.assign(s.size(), kInf);
  const double radius = r.value_or(kInf);

  const auto pts = boundary.sample(s, opt.tol);
  for (std::size_t pi = 0; pi < pts.size(); ++pi) {
    const Vec& x = pts[pi];
    const auto act = active_set(s, x, opt.tol.active);
    if (act.empty()) {
      ++cert.points_skipped;
      continue;
    }
    std::vector<Vec> grads;
    for (std::size_t i : act) grads.push_back(s.constraints[i].gradient(x));
    if (!linearly_independent(grads, opt.tol.rank)) {
      ++cert.points_skipped;
      detail::add_note(cert, "necessary condition not applicable at " +
                                 detail::format_point(x) +
                                 ": active gradients are linearly dependent");
      continue;
    }
    ++cert.boundary_points_checked;
    bool point_ok = true;
    for (std::size_t pos = 0; pos < act.size(); ++pos) {
      const auto ic = detail::check_index(s, x, act, grads, pos, radius, opt,
                                          derive_seed(opt.seed, pi));
      cert.index_worst_margin[act[pos]] = std::min(cert.index_worst_margin[act[pos]], ic.margin);
      cert.worst_margin = std::min(cert.worst_margin, ic.margin);
      if (ic.margin < -opt.tol.inequality) {
        point_ok = false;
        if (ic.worst) detail::add_witness(cert, *ic.worst);
      }
    }
    if (!point_ok) ++cert.points_failed;
  }
  if (cert.points_failed > 0) {
    cert.pass = false;
    cert.kind = CertificateKind::kNecessaryViolation;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Radii
// ---------------------------------------------------------------------------

struct MaxRadiusResult {
  double radius = 0.0;  // kInf when not strongly convex at the sampled resolution
  bool unbounded = false;
  Vec attained_at;
  Vec direction;
  std::size_t boundary_points = 0;
};

/// Sampled tight radius for a single constraint: the supremum over boundary
/// points x and unit h in ker g'(x) of |g'(x)| / D2_lower g(x,h^2). Any
/// nonpositive second derivative means no finite radius.
inline MaxRadiusResult max_radius(const SublevelSet& s, const BoundarySampler& boundary,
                                  const CertifyOptions& opt = {}) {
  if (s.size() != 1) {
    throw UnsupportedError("max_radius requires exactly one constraint");
  }
  const auto& g = s.constraints.front();
  MaxRadiusResult out;
  const auto pts = boundary.sample(s, opt.tol);
  for (std::size_t pi = 0; pi < pts.size(); ++pi) {
    const Vec& x = pts[pi];
    const Vec grad = g.gradient(x);
    ++out.boundary_points;
    const auto dirs = cone_kernel_directions({grad}, 0, opt.directions, opt.tol.cone_filter,
                                             derive_seed(opt.seed, pi));
    for (const Vec& h : dirs) {
      const double d2 = dir_second_lower(g, x, h, opt.schedule, &s.domain_box).value;
      if (d2 <= 0.0) {
        out.radius = kInf;
        out.unbounded = true;
        out.attained_at = x;
        out.direction = h;
        return out;
      }
      const double cand = grad.norm() * h.squaredNorm() / d2;
      if (cand > out.radius) {
        out.radius = cand;
        out.attained_at = x;
        out.direction = h;
      }
    }
  }
  return out;
}

/// Tight r-convexity radius of {x : <x, Px> <= 1}: sqrt(max eig P) / min eig P.
inline double ellipsoid_min_radius(const Mat& p) {
  if (p.rows() != p.cols() || p.rows() == 0) {
    throw NotPositiveDefiniteError("matrix must be square and nonempty");
  }
  if ((p - p.transpose()).norm() > 1e-12 * std::max(1.0, p.norm())) {
    throw NotPositiveDefiniteError("matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(p, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw NotPositiveDefiniteError("matrix is not positive definite");
  return std::sqrt(hi) / lo;
}

}  // namespace sconvex
