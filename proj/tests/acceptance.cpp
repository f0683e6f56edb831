// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "cli.hpp"

#include <sconvex/sconvex.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace sconvex;
using nlohmann::json;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

int failures = 0;

void criterion(int id, const std::string& title, double budget_seconds,
               const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > budget_seconds) {
    out.pass = false;
    out.note("runtime " + fmt(secs) + " s exceeds " + fmt(budget_seconds) + " s");
  }
  if (!out.pass) ++failures;
  std::printf("criterion %2d: %s  %s [%s] (%.4f s)\n", id, out.pass ? "PASS" : "FAIL",
              title.c_str(), out.detail.c_str(), secs);
  std::fflush(stdout);
}

// Membership in phi(t, B(c, s)) by integrating the reversed field.
MembershipPredicate flowed_ball(const VectorField& vf, const Vec& c, double s, double t) {
  const VectorField back = vf.reversed();
  std::vector<Vec> edge;
  for (const Vec& u : unit_directions(2, 256)) edge.push_back(integrate_state(vf, c + s * u, t, 256));
  Vec lo = edge.front();
  Vec hi = edge.front();
  for (const Vec& x : edge) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  MembershipPredicate m;
  m.bounds = Box(lo, hi).inflated(0.1, 1e-6);
  m.contains = [back, c, s, t](const Vec& z) {
    return (integrate_state(back, z, t, 64) - c).norm() <= s;
  };
  return m;
}

bool verified_witness(const MembershipPredicate& set, const OracleVerdict& v, double r) {
  if (!v.witness) return false;
  const auto& w = *v.witness;
  const Vec z = w.alpha * w.x + (1.0 - w.alpha) * w.y;
  const double rho = w.alpha * (1.0 - w.alpha) * (w.x - w.y).squaredNorm() / (2.0 * r);
  return set.contains(w.x) && set.contains(w.y) && !set.contains(w.probe) &&
         (w.probe - z).norm() <= rho * (1.0 + 1e-12);
}

std::size_t containment_misses(const VectorField& vf, const Ball& init, double t,
                               const BallIntersection& k, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t missed = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec z = integrate_state(vf, rng.in_ball(init.center, init.radius), t, 128);
    if (!ball_intersection_membership(k, z, 1e-6)) ++missed;
  }
  return missed;
}

}  // namespace

int main() {
  criterion(1, "pendulum constants, first step", 1e-3, [] {
    Outcome o;
    const PendulumParams p{1.0, 0.01, 0.0};
    const PendulumConstants c = pendulum_constants(p, 0.32);
    const PendulumRadius r = pendulum_radius(p, 0.4, 0.32);
    o.require(c.l1_at_t() <= 0.37, "L1(0.32) <= 0.37");
    o.require(c.lambda_plus <= 1.0, "lambda+ <= 1");
    o.require(c.lambda_minus >= -1.02, "lambda- >= -1.02");
    o.require(r.radius && *r.radius <= 1.24, "r <= 1.24");
    o.require(r.certified, "preconditions hold");
    o.note("L1=" + fmt(c.l1_at_t()) + " lambda+=" + fmt(c.lambda_plus) + " lambda-=" +
           fmt(c.lambda_minus) + " r=" + (r.radius ? fmt(*r.radius) : "none"));
    return o;
  });

  criterion(2, "pendulum constants, second step", 1e-3, [] {
    Outcome o;
    const PendulumRadius r = pendulum_radius({1.0, 0.01, -1.0}, 1.24, 0.32);
    o.require(r.radius && *r.radius <= 12.0, "r <= 12");
    o.note("omega_hat=" + fmt(r.constants.omega_hat) + " L1=" + fmt(r.l1) +
           " r=" + (r.radius ? fmt(*r.radius) : "none"));
    return o;
  });

  criterion(3, "ellipse tightness", 2.0, [] {
    Outcome o;
    const Fixture f = make_fixture("ellipse");
    const double r0 = ellipsoid_min_radius(Eigen::Vector2d(1, 4).asDiagonal().toDenseMatrix());
    o.require(r0 == 2.0, "ellipsoid_min_radius == 2");
    SampleConfig cfg;
    cfg.pairs = 500;
    cfg.seed = 1;
    const OracleVerdict above = sigma_regularity_oracle(f.predicate, 2.1, cfg);
    const OracleVerdict below = sigma_regularity_oracle(f.predicate, 1.9, cfg);
    o.require(above.pass, "oracle PASS at r = 2.1");
    o.require(!below.pass, "oracle FAIL at r = 1.9");
    o.require(verified_witness(f.predicate, below, 1.9), "witness at r = 1.9 verified");
    o.note("radius=" + fmt(r0) + " pairs=" + std::to_string(above.pairs_checked));
    return o;
  });

  criterion(4, "counterexample fixtures", 5.0, [] {
    Outcome o;
    const Fixture annulus = make_fixture("annulus");
    const Certificate ca = certify_convexity(annulus.set, annulus.boundary);
    o.require(!ca.pass && ca.boundary_points_checked > 0 &&
                  ca.cq_failures == ca.boundary_points_checked,
              "annulus fails the CQ at every point");

    const Fixture two = make_fixture("two-disk");
    const double d2 = dir_second_lower(two.set.constraints[1], v2(1, 0), v2(0, 1)).value;
    o.require(d2 == -2.0, "g2''(1,0)h^2 == -2");
    const Certificate nec = check_necessary(two.set, std::nullopt, two.boundary);
    bool skipped = false;
    for (const auto& n : nec.notes) {
      if (n.find("not applicable at (1, 0)") != std::string::npos) skipped = true;
    }
    o.require(nec.points_skipped == 1 && skipped, "necessary check skips (1,0)");

    const Fixture cubic = make_fixture("cubic3d");
    const OracleVerdict v = sigma_regularity_oracle(cubic.predicate, kInf, SampleConfig{});
    o.require(!v.pass && verified_witness(cubic.predicate, v, kInf), "cubic3d non-convex per oracle");
    const Certificate ineq = detail::certify_sufficient(cubic.set, kInf, false, true, cubic.boundary, {});
    o.require(ineq.pass && ineq.points_failed == 0, "inequality holds for all sampled (i, h)");
    o.note("annulus cq_failures=" + std::to_string(ca.cq_failures) + "/" +
           std::to_string(ca.boundary_points_checked) + " two-disk d2=" + fmt(d2) +
           " cubic3d worst_margin=" + fmt(ineq.worst_margin));
    return o;
  });

  criterion(5, "max-function proposition", 1.0, [] {
    Outcome o;
    auto poly = [](std::vector<double> c) {
      const int deg = static_cast<int>(c.size()) - 1;
      return ConstraintFunction::from_polynomial(Polynomial(1, deg, std::move(c)));
    };
    const auto est = max_dir_second_upper({poly({0, -1, 1}), poly({0, 1})}, Vec::Zero(1), Vec::Ones(1));
    o.require(std::abs(est.upper) <= 1e-6, "estimate == 0");
    o.require(est.upper >= est.lower_bound - 1e-6, "argmax lower bound holds");
    Rng rng(5);
    std::size_t bad = 0;
    for (int k = 0; k < 100; ++k) {
      std::vector<double> a(5), b(5);
      for (double& x : a) x = rng.normal();
      for (double& x : b) x = rng.normal();
      b[0] = a[0];
      if (k % 2 == 0) b[1] = a[1];
      const Vec h = Vec::Constant(1, k % 3 == 0 ? -1.0 : 1.0);
      const auto e = max_dir_second_upper({poly(a), poly(b)}, Vec::Zero(1), h);
      if (e.upper < e.lower_bound - 1e-6) ++bad;
    }
    o.require(bad == 0, "100 random pairs");
    o.note("estimate=" + fmt(est.upper) + " violations=" + std::to_string(bad));
    return o;
  });

  criterion(6, "containment soundness", 30.0, [] {
    Outcome o;
    const std::size_t samples = 10000;
    for (double u : {0.0, -1.0}) {
      const PendulumParams p{1.0, 0.01, u};
      const VectorField vf = pendulum_field(p);
      const Ball init(v2(0, 0), 0.4);
      const auto r = pendulum_radius(p, 0.4, 0.32).radius;
      const BallIntersection k = reach_overapprox(vf, init, 0.4, 0.32, r);
      const std::size_t missed = containment_misses(vf, init, 0.32, k, samples, 61);
      o.require(missed == 0, "pendulum u=" + fmt(u));
      o.note("pendulum u=" + fmt(u) + " missed " + std::to_string(missed) + "/" + std::to_string(samples));
    }
    const VectorField rot = VectorField::rotation();
    const Ball init(v2(1, 0), 0.3);
    const Box hull = trajectory_hull(rot, {v2(1.3, 0), v2(0.7, 0), v2(1, 0.3), v2(1, -0.3)}, 1.0, 64);
    const auto r = radius_c11(0.3, 1.0, estimate_bounds(rot, hull));
    const BallIntersection k = reach_overapprox(rot, init, 0.3, 1.0, r);
    const std::size_t missed = containment_misses(rot, init, 1.0, k, samples, 62);
    o.require(missed == 0, "rotation");
    o.note("rotation missed " + std::to_string(missed) + "/" + std::to_string(samples));
    return o;
  });

  criterion(7, "strong convexity of the attainable set", 60.0, [] {
    Outcome o;
    const PendulumParams p{1.0, 0.01, 0.0};
    const double r = *pendulum_radius(p, 0.4, 0.32).radius;
    const MembershipPredicate set = flowed_ball(pendulum_field(p), v2(0, 0), 0.4, 0.32);
    SampleConfig cfg;
    cfg.pairs = 500;
    const OracleVerdict v = sigma_regularity_oracle(set, r, cfg);
    o.require(v.pass, "oracle PASS at the computed radius");
    o.note("r=" + fmt(r) + " pairs=" + std::to_string(v.pairs_checked) +
           " probes=" + std::to_string(v.probes_checked));
    return o;
  });

  criterion(8, "ball vs half-space transitions", 60.0, [] {
    Outcome o;
    const json base = cli::load_config(std::string(SCONVEX_SOURCE_DIR) + "/configs/scenario.json");
    const std::uint64_t shipped_seed = base.value("seed", 1);
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      json cfg = base;
      cfg["seed"] = seed;
      cfg["abstraction"]["check_samples"] = seed == shipped_seed ? 10000 : 1000;
      const cli::Report rep = cli::run(cfg);
      const auto& rb = rep.results["transitions_balls"];
      const auto& rh = rep.results["transitions_halfspaces"];
      std::set<json> hs(rh.begin(), rh.end());
      bool subset = true;
      for (const auto& t : rb) subset = subset && hs.count(t);
      const std::size_t eliminated = rep.results["spurious_eliminated"].get<std::size_t>();
      o.require(rep.status == "PASS", "soundness on seed " + std::to_string(seed));
      o.require(subset, "ball set within half-space set on seed " + std::to_string(seed));
      if (seed == shipped_seed) {
        o.require(eliminated >= 1 && rb.size() < rh.size(), "strict reduction on the shipped scenario");
      }
      per_seed += (per_seed.empty() ? "" : " ") + std::to_string(rb.size()) + "/" +
                  std::to_string(rh.size());
    }
    o.note("balls/halfspaces per seed 1..10: " + per_seed);
    return o;
  });

  criterion(9, "numerical infrastructure", 5.0, [] {
    Outcome o;
    const VectorField vf = pendulum_field({1.0, 0.01, -1.0});
    Rng rng(9);
    double fd_err = 0.0;
    double pairing_err = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Vec x0 = rng.uniform_in(Box::cube(2, 1.0));
      const Vec p0 = rng.unit_vector(2);
      const Vec h = rng.unit_vector(2);
      const FlowBundle b = flow(vf, x0, 0.32, 1024, p0);
      Mat fd(2, 2);
      for (int j = 0; j < 2; ++j) {
        const Vec e = 1e-5 * Vec::Unit(2, j);
        fd.col(j) = (integrate_state(vf, x0 + e, 0.32, 1024) - integrate_state(vf, x0 - e, 0.32, 1024)) / 2e-5;
      }
      fd_err = std::max(fd_err, (fd - b.final_variational()).norm() / b.final_variational().norm());
      for (std::size_t i = 0; i < b.size(); ++i) {
        pairing_err = std::max(pairing_err, std::abs(b.adjoint[i].dot(b.variational[i] * h) - p0.dot(h)));
      }
    }
    o.require(fd_err <= 1e-3, "variational vs finite differences");
    o.require(pairing_err <= 1e-8, "adjoint pairing");

    Mat a(2, 2);
    a << 0.3, -1.1, 0.7, -0.4;
    const FlowBundle lin = flow(VectorField::linear(a), v2(0.5, -0.2), 0.9, 1024);
    const Mat expm = (0.9 * a).exp();
    const double lin_err = std::max((lin.final_state() - expm * v2(0.5, -0.2)).norm(),
                                    (lin.final_variational() - expm).norm());
    o.require(lin_err <= 1e-8, "linear flow vs matrix exponential");

    const FlowBundle pend = flow(pendulum_field({1.0, 0.0, 0.0}), v2(0.1, 0.0), 0.32, 1024);
    auto energy = [](const Vec& x) { return (1.0 - std::cos(x[0])) + 0.5 * x[1] * x[1]; };
    double drift = 0.0;
    for (const Vec& x : pend.states) drift = std::max(drift, std::abs(energy(x) - energy(pend.states[0])));
    o.require(drift <= 1e-8, "energy conservation");
    o.note("fd_rel=" + fmt(fd_err, 3) + " pairing=" + fmt(pairing_err, 3) + " expm=" + fmt(lin_err, 3) +
           " energy=" + fmt(drift, 3));
    return o;
  });

  criterion(10, "empirical vs closed-form L1", 30.0, [] {
    Outcome o;
    double worst_gap = -kInf;
    for (double u : {0.0, -1.0}) {
      const PendulumParams p{1.0, 0.01, u};
      const VectorField vf = pendulum_field(p);
      for (double radius : {0.4, 1.0, 3.0}) {
        Rng rng(derive_seed(10, static_cast<std::uint64_t>(radius * 10)));
        std::vector<Vec> pts;
        for (int k = 0; k < 40; ++k) pts.push_back(rng.in_ball(Vec::Zero(2), radius));
        for (double t : {0.1, 0.2, 0.32}) {
          const double emp = l1_empirical(vf, pts, t, 16, 128);
          const double closed = pendulum_constants(p, t).l1_at_t();
          worst_gap = std::max(worst_gap, emp - closed);
          o.require(emp <= closed + 1e-6, "u=" + fmt(u) + " radius=" + fmt(radius) + " t=" + fmt(t));
        }
      }
    }
    o.note("max(empirical - closed form)=" + fmt(worst_gap));
    return o;
  });

  std::printf("%s: %d criterion failure(s)\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
