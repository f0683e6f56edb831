#include "cli.hpp"

#include "schema.hpp"
#include "svg.hpp"

#include <sconvex/sconvex.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace sconvex::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json jvec(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(jnum(v[i]));
  return a;
}

Vec to_vec(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json jpatches(const BallIntersection& k) {
  json a = json::array();
  for (const auto& p : k.patches) {
    a.push_back({{"point", jvec(p.point)}, {"normal", jvec(p.normal)}, {"radius", jnum(p.radius)}});
  }
  return a;
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj[key].get<T>() : fallback;
}

json section(const json& config, const std::string& name) {
  return config.contains(name) ? config[name] : json::object();
}

ToleranceConfig tolerances(const json& config) {
  const json t = section(config, "tolerances");
  ToleranceConfig tol;
  tol.active = get_or(t, "active", tol.active);
  tol.cone_margin = get_or(t, "cone_margin", tol.cone_margin);
  tol.inequality = get_or(t, "inequality", tol.inequality);
  tol.rank = get_or(t, "rank", tol.rank);
  tol.cone_filter = get_or(t, "cone_filter", tol.cone_filter);
  tol.boundary = get_or(t, "boundary", tol.boundary);
  return tol;
}

std::uint64_t seed_of(const json& config) { return get_or<std::uint64_t>(config, "seed", 1); }

// ---------------------------------------------------------------------------
// Sets and fields from configuration
// ---------------------------------------------------------------------------

Polynomial polynomial_from(const json& p) {
  return Polynomial(p["dim"].get<int>(), p["degree"].get<int>(),
                    p["coefficients"].get<std::vector<double>>());
}

Fixture set_from(const json& sec, std::uint64_t seed, std::size_t boundary_points) {
  if (sec.contains("fixture") == sec.contains("set")) {
    throw ConfigError("give exactly one of 'fixture' or 'set'");
  }
  if (sec.contains("fixture")) {
    Fixture f = make_fixture(sec["fixture"].get<std::string>());
    return f;
  }
  const json& s = sec["set"];
  const Box box(to_vec(s["box"]["lower"]), to_vec(s["box"]["upper"]));
  std::vector<ConstraintFunction> gs;
  for (std::size_t i = 0; i < s["constraints"].size(); ++i) {
    const json& c = s["constraints"][i];
    const Polynomial p = polynomial_from(c);
    if (p.dim() != box.dim()) {
      throw ConfigError("set.constraints[" + std::to_string(i) + "] has dim " +
                        std::to_string(p.dim()) + " but the box has dim " +
                        std::to_string(box.dim()));
    }
    gs.push_back(ConstraintFunction::from_polynomial(
        p, get_or<std::string>(c, "name", "g" + std::to_string(i + 1))));
  }
  SublevelSet set(std::move(gs), box);
  MembershipPredicate pred = as_predicate(set);
  const std::size_t count =
      boundary_points ? boundary_points : BoundarySampler::default_count(set.dim());
  return Fixture{"inline", "inline sublevel set", set, BoundarySampler::rays(count, seed), pred,
                 std::nullopt};
}

json witness_json(const CertificateWitness& w) {
  json j = {{"x", jvec(w.x)}, {"h", jvec(w.h)}, {"lhs", jnum(w.lhs)}, {"rhs", jnum(w.rhs)},
            {"condition", w.condition}};
  j["index"] = w.index ? json(*w.index + 1) : json(nullptr);
  return j;
}

json certificate_json(const Certificate& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["verdict"] = c.pass ? "PASS" : "FAIL";
  j["boundary_points_checked"] = c.boundary_points_checked;
  j["points_failed"] = c.points_failed;
  j["cq_failures"] = c.cq_failures;
  j["points_skipped"] = c.points_skipped;
  j["worst_margin"] = jnum(c.worst_margin);
  json per = json::array();
  for (double m : c.index_worst_margin) per.push_back(jnum(m));
  j["index_worst_margin"] = per;
  j["radius"] = c.radius ? jnum(*c.radius) : json(nullptr);
  json ws = json::array();
  for (const auto& w : c.witnesses) ws.push_back(witness_json(w));
  j["witnesses"] = ws;
  j["notes"] = c.notes;
  return j;
}

VectorField field_from(const json& f, PendulumParams* pendulum) {
  const std::string kind = f["kind"].get<std::string>();
  VectorField vf;
  if (kind == "zero") {
    vf = VectorField::zero(get_or(f, "dim", 2));
  } else if (kind == "rotation") {
    vf = VectorField::rotation();
  } else if (kind == "linear") {
    if (!f.contains("matrix")) throw ConfigError("reach.field.matrix is required for kind linear");
    const json& rows = f["matrix"];
    Mat a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw ConfigError("reach.field.matrix must be square");
      a.row(static_cast<Eigen::Index>(i)) = to_vec(rows[i]).transpose();
    }
    vf = VectorField::linear(a);
  } else if (kind == "pendulum") {
    PendulumParams p{get_or(f, "omega", 1.0), get_or(f, "gamma", 0.0), get_or(f, "u", 0.0)};
    if (pendulum) *pendulum = p;
    vf = pendulum_field(p);
  } else {
    if (!f.contains("components")) {
      throw ConfigError("reach.field.components is required for kind polynomial");
    }
    std::vector<Polynomial> comps;
    for (const auto& c : f["components"]) comps.push_back(polynomial_from(c));
    vf = VectorField::from_polynomials(std::move(comps));
  }
  if (f.contains("lipschitz_jac")) vf.lipschitz_jac = f["lipschitz_jac"].get<double>();
  return vf;
}

Box bounding_box(const InitialSet& init) {
  if (const auto* b = std::get_if<Ball>(&init)) {
    return Box(b->center.array() - b->radius, b->center.array() + b->radius);
  }
  const auto& k = std::get<BallIntersection>(init);
  // The smallest supporting ball bounds the intersection.
  std::size_t best = 0;
  for (std::size_t i = 1; i < k.patches.size(); ++i) {
    if (k.patches[i].radius < k.patches[best].radius) best = i;
  }
  const Ball b = supporting_ball(k.patches[best]);
  return Box(b.center.array() - b.radius, b.center.array() + b.radius);
}

std::vector<Vec> sample_init(const InitialSet& init, std::size_t count, Rng& rng) {
  std::vector<Vec> out;
  out.reserve(count);
  if (const auto* b = std::get_if<Ball>(&init)) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(rng.in_ball(b->center, b->radius));
    return out;
  }
  const auto& k = std::get<BallIntersection>(init);
  const Box box = bounding_box(init);
  for (std::size_t tries = 0; out.size() < count && tries < 1000 * count; ++tries) {
    const Vec x = rng.uniform_in(box);
    if (ball_intersection_membership(k, x)) out.push_back(x);
  }
  if (out.size() < count) throw EmptySampleError("could not sample the initial set");
  return out;
}

std::vector<Vec> circle_polyline(const Vec& c, double r, std::size_t n = 128) {
  std::vector<Vec> pts;
  for (const Vec& v : unit_directions(2, n)) pts.push_back(c + r * v);
  return pts;
}

// Boundary of a planar ball intersection traced by support points.
std::vector<Vec> intersection_outline(const BallIntersection& k, std::size_t n = 180) {
  std::vector<Vec> pts;
  for (const Vec& v : unit_directions(2, n)) pts.push_back(support_point(k, v));
  return pts;
}

Box scene_view(const std::vector<Vec>& pts, double margin) {
  Vec lo = pts.front();
  Vec hi = pts.front();
  for (const Vec& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return Box(lo.array() - margin, hi.array() + margin);
}

void draw_patches(SvgScene& scene, const BallIntersection& k, const std::string& ball_style,
                  const std::string& line_style) {
  for (const auto& p : k.patches) {
    const Ball b = supporting_ball(p);
    scene.add_circle(b.center, b.radius, ball_style);
    scene.add_halfplane_line(p.point, p.normal, line_style);
  }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void run_certify(const json& config, Report& rep) {
  const json sec = section(config, "certify");
  const std::uint64_t seed = seed_of(config);
  const Fixture f = set_from(sec, seed, get_or<std::size_t>(sec, "boundary_points", 0));
  CertifyOptions opt;
  opt.tol = tolerances(config);
  opt.seed = seed;
  opt.directions = get_or<std::size_t>(sec, "directions", opt.directions);
  const std::string mode = get_or<std::string>(sec, "mode", "exists");
  std::optional<double> r;
  if (sec.contains("r")) r = sec["r"].get<double>();

  Certificate cert;
  if (mode == "necessary") {
    cert = check_necessary(f.set, r, f.boundary, opt);
  } else if (r) {
    cert = certify_r_convexity(f.set, *r,
                               mode == "all" ? RConvexMode::kAllIndices : RConvexMode::kExistsIndex,
                               f.boundary, opt);
  } else {
    cert = certify_convexity(f.set, f.boundary, opt);
  }
  rep.results["fixture"] = f.name;
  rep.results["certificate"] = certificate_json(cert);
  for (const auto& c : cert.caveats) rep.caveats.push_back(c);
  rep.status = cert.pass ? "PASS" : "FAIL";
  rep.exit_code = cert.pass ? kExitOk : kExitFail;
}

void run_oracle(const json& config, Report& rep) {
  const json sec = section(config, "oracle");
  const Fixture f = set_from(sec, seed_of(config), 0);
  SampleConfig cfg;
  cfg.seed = seed_of(config);
  cfg.pairs = get_or<std::size_t>(sec, "pairs", cfg.pairs);
  cfg.alphas = get_or<std::size_t>(sec, "alphas", cfg.alphas);
  cfg.probes = get_or<std::size_t>(sec, "probes", cfg.probes);
  cfg.boundary_tol = tolerances(config).boundary;
  const double r = get_or(sec, "r", kInf);
  const OracleVerdict v = sigma_regularity_oracle(f.predicate, r, cfg);
  json j;
  j["verdict"] = v.pass ? "PASS" : "FAIL";
  j["radius"] = jnum(v.radius);
  j["pairs_checked"] = v.pairs_checked;
  j["probes_checked"] = v.probes_checked;
  j["zero_sample_warning"] = v.zero_sample_warning;
  if (v.witness) {
    j["witness"] = {{"x", jvec(v.witness->x)},
                    {"y", jvec(v.witness->y)},
                    {"alpha", v.witness->alpha},
                    {"probe", jvec(v.witness->probe)}};
  } else {
    j["witness"] = nullptr;
  }
  rep.results["fixture"] = f.name;
  rep.results["oracle"] = j;
  rep.caveats.push_back("sampled oracle: a PASS is evidence, not a proof");
  if (v.zero_sample_warning) rep.caveats.push_back("some probes found no samples");
  rep.status = v.pass ? "PASS" : "FAIL";
  rep.exit_code = v.pass ? kExitOk : kExitFail;
}

void run_max_radius(const json& config, Report& rep) {
  const json sec = section(config, "max-radius");
  const Fixture f = set_from(sec, seed_of(config), get_or<std::size_t>(sec, "boundary_points", 0));
  CertifyOptions opt;
  opt.tol = tolerances(config);
  opt.seed = seed_of(config);
  opt.directions = get_or<std::size_t>(sec, "directions", opt.directions);
  const MaxRadiusResult m = max_radius(f.set, f.boundary, opt);
  rep.results["fixture"] = f.name;
  rep.results["radius"] = jnum(m.radius);
  rep.results["unbounded"] = m.unbounded;
  rep.results["attained_at"] = m.attained_at.size() ? jvec(m.attained_at) : json(nullptr);
  rep.results["direction"] = m.direction.size() ? jvec(m.direction) : json(nullptr);
  rep.results["boundary_points"] = m.boundary_points;
  rep.caveats.push_back("radius is the supremum over sampled boundary points and directions");
  rep.status = "feasible";
  rep.exit_code = kExitOk;
}

void run_reach(const json& config, Report& rep, bool want_svg) {
  const json sec = section(config, "reach");
  const std::uint64_t seed = seed_of(config);
  PendulumParams pend;
  const VectorField vf = field_from(sec["field"], &pend);
  const bool is_pendulum = sec["field"]["kind"] == "pendulum";
  const double t = sec["t"].get<double>();
  const json& in = sec["init"];

  InitialSet init = Ball(Vec::Zero(vf.dim), 0.0);
  double s = 0.0;
  if (in.contains("patches") == (in.contains("center") || in.contains("radius"))) {
    throw ConfigError("reach.init needs either center+radius or patches");
  }
  if (in.contains("patches")) {
    std::vector<SupportPatch> ps;
    for (const auto& p : in["patches"]) {
      ps.emplace_back(to_vec(p["point"]), to_vec(p["normal"]).normalized(), p["radius"].get<double>());
    }
    BallIntersection k(std::move(ps));
    s = k.min_radius();
    init = k;
  } else {
    if (!in.contains("center") || !in.contains("radius")) {
      throw ConfigError("reach.init needs both center and radius");
    }
    const Vec c = to_vec(in["center"]);
    s = in["radius"].get<double>();
    init = Ball(c, s);
  }
  if (bounding_box(init).dim() != vf.dim) throw ConfigError("reach.init dimension mismatch");

  const std::string rule =
      get_or<std::string>(sec, "radius_rule", is_pendulum ? "pendulum" : (vf.hess_quadform ? "c2" : "c11"));
  const std::size_t steps = get_or<std::size_t>(sec, "steps", 1024);
  const std::size_t directions = get_or<std::size_t>(sec, "directions", 16);
  std::optional<double> r;
  bool certified = false;
  json radius_info;
  radius_info["rule"] = rule;
  radius_info["s"] = s;
  if (rule == "fixed") {
    if (!sec.contains("radius")) throw ConfigError("reach.radius is required for radius_rule fixed");
    r = sec["radius"].get<double>();
    rep.caveats.push_back("radius supplied by the user, not derived");
  } else if (rule == "pendulum") {
    if (!is_pendulum) throw ConfigError("radius_rule pendulum needs a pendulum field");
    if (s == 0.0) throw ConfigError("radius_rule pendulum needs a positive initial radius");
    const PendulumRadius pr = pendulum_radius(pend, s, t);
    r = pr.radius;
    certified = pr.certified;
    radius_info["L1"] = pr.l1;
    radius_info["lambda_plus"] = pr.constants.lambda_plus;
    radius_info["lambda_minus"] = pr.constants.lambda_minus;
    radius_info["preconditions"] = pr.constants.reasons;
  } else {
    if (s == 0.0) throw ConfigError("radius rules c2/c11 need a positive initial radius");
    Rng rng(derive_seed(seed, 0xb0));
    const auto pts = sample_init(init, 64, rng);
    const Box hull = trajectory_hull(vf, pts, t, std::min<std::size_t>(steps, 256));
    BoundsGrid grid;
    grid.seed = seed;
    const GrowthBounds b = estimate_bounds(vf, hull, grid);
    radius_info["lambda_plus"] = b.lambda_plus;
    radius_info["lambda_minus"] = b.lambda_minus;
    radius_info["M1"] = b.M1;
    radius_info["M2"] = b.M2;
    radius_info["bounds_box"] = {{"lower", jvec(hull.lower)}, {"upper", jvec(hull.upper)}};
    rep.caveats.push_back("growth bounds taken over a sampled trajectory hull");
    if (rule == "c2") {
      if (!vf.hess_quadform) throw ConfigError("radius_rule c2 needs a C^2 field");
      const double l1 = l1_empirical(vf, sample_init(init, 64, rng), t, 32, std::min<std::size_t>(steps, 256));
      radius_info["L1"] = l1;
      r = radius_c2(s, t, l1, b);
      rep.caveats.push_back("L1 is a sampled lower estimate (heuristic)");
    } else {
      r = radius_c11(s, t, b);
      if (b.m2_heuristic) rep.caveats.push_back("M2 estimated by finite differences (heuristic)");
      certified = !b.m2_heuristic;
    }
  }
  radius_info["radius"] = r ? jnum(*r) : json(nullptr);
  radius_info["certified"] = certified;
  rep.results["radius"] = radius_info;
  if (!certified) rep.caveats.push_back("radius is non-certified");
  if (!r) {
    rep.status = "infeasible";
    rep.exit_code = kExitFail;
    return;
  }

  ReachOptions ro;
  ro.directions = directions;
  ro.steps = steps;
  ro.angle_offset = seeded_angle_offset(seed, directions);
  const BallIntersection approx = reach_overapprox(vf, init, s, t, r, ro);
  rep.results["patches"] = jpatches(approx);

  const std::size_t checks = get_or<std::size_t>(sec, "check_samples", 10000);
  std::size_t outside = 0;
  double worst = 0.0;
  std::vector<Vec> flowed;
  if (checks > 0 && s > 0.0) {
    Rng rng(derive_seed(seed, 0xc4));
    for (const Vec& x : sample_init(init, checks, rng)) {
      const Vec y = integrate_state(vf, x, t, steps);
      double excess = 0.0;
      for (const auto& p : approx.patches) {
        const Ball b = supporting_ball(p);
        excess = std::max(excess, (y - b.center).norm() - b.radius);
      }
      worst = std::max(worst, excess);
      if (excess > 1e-6) ++outside;
      if (flowed.size() < 400) flowed.push_back(y);
    }
  }
  rep.results["containment"] = {
      {"samples", checks}, {"outside", outside}, {"max_excess", worst}, {"inflation", 1e-6}};
  const bool ok = outside == 0;
  rep.status = ok ? "feasible" : "FAIL";
  rep.exit_code = ok ? kExitOk : kExitFail;

  if (want_svg && vf.dim == 2) {
    std::vector<Vec> extent = intersection_outline(approx, 90);
    std::vector<Vec> init_outline;
    if (const auto* b = std::get_if<Ball>(&init)) {
      init_outline = circle_polyline(b->center, b->radius);
    } else {
      init_outline = intersection_outline(std::get<BallIntersection>(init), 90);
    }
    extent.insert(extent.end(), init_outline.begin(), init_outline.end());
    SvgScene scene(scene_view(extent, 0.25));
    draw_patches(scene, approx, "fill=\"none\" stroke=\"#9ab\" stroke-width=\"0.6\"",
                 "stroke=\"#c66\" stroke-width=\"0.6\" stroke-dasharray=\"4 3\"");
    scene.add_polyline(init_outline, "fill=\"none\" stroke=\"black\" stroke-width=\"1.2\"", true);
    scene.add_polyline(intersection_outline(approx), "fill=\"none\" stroke=\"#246\" stroke-width=\"1.5\"",
                       true);
    scene.add_points(flowed, 1.2, "fill=\"#2a2\"");
    rep.svg = scene.str();
  }
}

void run_pendulum(const json& config, Report& rep) {
  const json sec = section(config, "pendulum");
  if (!sec.contains("s") || !sec.contains("t")) throw ConfigError("pendulum needs s and t");
  const PendulumParams p{get_or(sec, "omega", 1.0), get_or(sec, "gamma", 0.0), get_or(sec, "u", 0.0)};
  const double s = sec["s"].get<double>();
  const double t = sec["t"].get<double>();
  const PendulumRadius pr = pendulum_radius(p, s, t);
  const auto& c = pr.constants;
  rep.results["omega_hat"] = c.omega_hat;
  rep.results["lambda_plus"] = c.lambda_plus;
  rep.results["lambda_minus"] = c.lambda_minus;
  rep.results["L1"] = pr.l1;
  rep.results["preconditions_ok"] = c.preconditions_ok;
  rep.results["preconditions"] = c.reasons;
  rep.results["radius"] = pr.radius ? jnum(*pr.radius) : json(nullptr);
  rep.results["certified"] = pr.certified;
  const auto c11 = radius_c11(s, t, c.growth_bounds());
  rep.results["radius_c11"] = c11 ? jnum(*c11) : json(nullptr);
  if (!c.preconditions_ok) rep.caveats.push_back("closed-form preconditions fail; radius not certified");
  rep.status = pr.radius ? "feasible" : "infeasible";
  rep.exit_code = pr.radius ? kExitOk : kExitFail;
}

std::string transitions_csv(const std::vector<Transition>& ts) {
  std::string out = "source,control,target\n";
  for (const auto& t : ts) {
    out += std::to_string(t.source) + "," + std::to_string(t.control) + "," +
           std::to_string(t.target) + "\n";
  }
  return out;
}

json transitions_json(const std::vector<Transition>& ts) {
  json a = json::array();
  for (const auto& t : ts) a.push_back({t.source, t.control, t.target});
  return a;
}

void run_abstraction(const json& config, Report& rep, bool want_svg) {
  const json sec = section(config, "abstraction");
  const std::uint64_t seed = seed_of(config);
  const json& g = sec["grid"];
  const auto counts = g["counts"].get<std::vector<int>>();
  const CellGrid grid = CellGrid::uniform(to_vec(g["lower"]), to_vec(g["cell_size"]), counts);
  const auto src_index = sec["source_cell"].get<std::size_t>();
  if (src_index >= grid.size()) {
    throw ConfigError("abstraction.source_cell " + std::to_string(src_index) + " outside the grid of " +
                      std::to_string(grid.size()) + " cells");
  }
  const double s = sec["s"].get<double>();
  const double horizon = sec["T"].get<double>();
  const auto controls = sec["controls"].get<std::vector<double>>();
  const std::string method = get_or<std::string>(sec, "method", "both");
  const std::string field = get_or<std::string>(sec, "field", "pendulum");
  AbstractionOptions opt;
  opt.patches = get_or<std::size_t>(sec, "patches", 16);
  opt.steps = get_or<std::size_t>(sec, "steps", 1024);
  opt.angle_offset = seeded_angle_offset(seed, opt.patches);
  opt.run_balls = method != "halfspaces";
  opt.run_halfspaces = method != "balls";
  const PendulumParams base{get_or(sec, "omega", 1.0), get_or(sec, "gamma", 0.0), 0.0};
  const SourceRegion src = cell_source(grid, src_index, s);

  TransitionReport tr;
  try {
    tr = field == "zero" ? zero_field_abstraction_step(grid, src, controls, horizon, opt)
                         : pendulum_abstraction_step(grid, src, controls, base, horizon, opt);
  } catch (const InfeasibleRadiusError& e) {
    rep.results["error"] = e.what();
    rep.status = "infeasible";
    rep.exit_code = kExitFail;
    return;
  }
  rep.results["cells"] = grid.size();
  rep.results["source_cell"] = src_index;
  rep.results["source_label"] = grid.label(src_index);
  rep.results["controls"] = controls;
  json approx = json::array();
  for (const auto& ca : tr.approximations) {
    approx.push_back({{"u", ca.u}, {"radii", ca.radii}, {"patches", jpatches(ca.approx)}});
  }
  rep.results["approximations"] = approx;
  if (tr.ran_balls) rep.results["transitions_balls"] = transitions_json(tr.balls);
  if (tr.ran_halfspaces) rep.results["transitions_halfspaces"] = transitions_json(tr.halfspaces);
  if (tr.ran_balls && tr.ran_halfspaces) rep.results["spurious_eliminated"] = tr.spurious_eliminated;
  rep.results["certified"] = tr.certified;
  if (!tr.certified) rep.caveats.push_back("some radii are non-certified");

  // Monte-Carlo soundness: every cell hit by a flowed sample must be listed.
  const std::size_t checks = get_or<std::size_t>(sec, "check_samples", 10000);
  const Box& cell = grid.cell(src_index);
  std::size_t missed_balls = 0;
  std::size_t missed_halfspaces = 0;
  std::vector<std::vector<Vec>> flowed(controls.size());
  if (checks > 0) {
    const std::set<Transition> bs(tr.balls.begin(), tr.balls.end());
    const std::set<Transition> hs(tr.halfspaces.begin(), tr.halfspaces.end());
    for (std::size_t ci = 0; ci < controls.size(); ++ci) {
      PendulumParams p = base;
      p.u = controls[ci];
      const VectorField vf = field == "zero" ? VectorField::zero(grid.cell(0).dim()) : pendulum_field(p);
      Rng rng(derive_seed(seed, 0xab00 + ci));
      for (std::size_t k = 0; k < checks; ++k) {
        const Vec y = integrate_state(vf, rng.uniform_in(cell), horizon, std::max<std::size_t>(opt.steps / 4, 64));
        if (flowed[ci].size() < 300) flowed[ci].push_back(y);
        for (std::size_t target : grid.cells_containing(y)) {
          const Transition t{src_index, ci, target};
          if (tr.ran_balls && !bs.count(t)) ++missed_balls;
          if (tr.ran_halfspaces && !hs.count(t)) ++missed_halfspaces;
        }
      }
    }
  }
  rep.results["soundness"] = {{"samples_per_control", checks},
                              {"missed_balls", missed_balls},
                              {"missed_halfspaces", missed_halfspaces}};
  const bool sound = missed_balls == 0 && missed_halfspaces == 0;
  rep.status = sound ? "PASS" : "FAIL";
  rep.exit_code = sound ? kExitOk : kExitFail;
  if (tr.ran_balls) rep.transitions_csv = transitions_csv(tr.balls);
  if (tr.ran_halfspaces) {
    if (tr.ran_balls) {
      rep.transitions_halfspaces_csv = transitions_csv(tr.halfspaces);
    } else {
      rep.transitions_csv = transitions_csv(tr.halfspaces);
    }
  }

  if (want_svg && grid.cell(0).dim() == 2) {
    std::vector<Vec> corners;
    for (const Box& b : grid.cells()) {
      corners.push_back(b.lower);
      corners.push_back(b.upper);
    }
    SvgScene scene(scene_view(corners, 0.1));
    std::set<std::size_t> hit_balls;
    std::set<std::size_t> hit_half;
    for (const auto& t : tr.balls) hit_balls.insert(t.target);
    for (const auto& t : tr.halfspaces) hit_half.insert(t.target);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::string fill = "none";
      if (i == src_index) {
        fill = "#ffd";
      } else if (hit_balls.count(i)) {
        fill = "#def";
      } else if (hit_half.count(i)) {
        fill = "#fdd";
      }
      scene.add_rect(grid.cell(i), "fill=\"" + fill + "\" stroke=\"#888\" stroke-width=\"0.8\"");
    }
    for (std::size_t ci = 0; ci < tr.approximations.size(); ++ci) {
      const auto& k = tr.approximations[ci].approx;
      for (const auto& p : k.patches) {
        scene.add_halfplane_line(p.point, p.normal, "stroke=\"#c66\" stroke-width=\"0.6\" stroke-dasharray=\"4 3\"");
      }
      scene.add_polyline(intersection_outline(k), "fill=\"none\" stroke=\"#246\" stroke-width=\"1.4\"", true);
      scene.add_points(flowed[ci], 1.0, "fill=\"#2a2\"");
    }
    const Box& sc = grid.cell(src_index);
    scene.add_polyline(circle_polyline(sc.center(), 0.5 * sc.diagonal()),
                       "fill=\"none\" stroke=\"black\" stroke-width=\"1\"", true);
    rep.svg = scene.str();
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

json Report::to_json(bool with_wall_clock) const {
  json j;
  j["command"] = command;
  j["config"] = config;
  j["input_digest"] = input_digest;
  j["status"] = status;
  j["exit_code"] = exit_code;
  j["results"] = results;
  j["caveats"] = caveats;
  if (with_wall_clock) j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

std::string fnv1a_digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate_config(const json& config, const std::string& source_text, const std::string& origin) {
  const auto issues = validate(config, config_schema(), source_text);
  if (issues.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& i : issues) {
    msg += "\n  " + origin + (i.line ? ":" + std::to_string(i.line) : "") + ": " + i.path + ": " +
           i.message;
  }
  throw ConfigError(msg);
}

json load_config(const std::string& path) {
  const std::string text = read_file(path);
  json doc = parse_config_text(text, path);
  validate_config(doc, text, path);
  return doc;
}

Report run(const json& config, bool want_svg) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.command = config["command"].get<std::string>();
  rep.config = config;
  rep.config.erase("output");
  if (!rep.config.contains("seed")) rep.config["seed"] = 1;
  rep.input_digest = fnv1a_digest(rep.config.dump());

  if (rep.command == "certify") {
    run_certify(rep.config, rep);
  } else if (rep.command == "oracle") {
    run_oracle(rep.config, rep);
  } else if (rep.command == "max-radius") {
    run_max_radius(rep.config, rep);
  } else if (rep.command == "reach") {
    run_reach(rep.config, rep, want_svg);
  } else if (rep.command == "pendulum") {
    run_pendulum(rep.config, rep);
  } else {
    run_abstraction(rep.config, rep, want_svg);
  }
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

void write_outputs(const Report& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_file(base / "report.json", report.to_json().dump(2) + "\n");
  if (!report.transitions_csv.empty()) write_file(base / "transitions.csv", report.transitions_csv);
  if (!report.transitions_halfspaces_csv.empty()) {
    write_file(base / "transitions_halfspaces.csv", report.transitions_halfspaces_csv);
  }
  if (!report.svg.empty()) write_file(base / (report.command + ".svg"), report.svg);
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Strong convexity certificates and attainable-set over-approximations"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool svg = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--out", out_dir, "directory for report.json and side outputs");
  app.add_flag("--svg", svg, "also render an SVG scene (planar results only)");

  // Flag name -> (section key, field key). Values are parsed by type.
  struct Flag {
    std::string name;
    std::string field;
    enum Kind { kNumber, kInteger, kString } kind;
  };
  const std::map<std::string, std::vector<Flag>> flags = {
      {"certify",
       {{"fixture", "fixture", Flag::kString},
        {"r", "r", Flag::kNumber},
        {"mode", "mode", Flag::kString},
        {"boundary-points", "boundary_points", Flag::kInteger},
        {"directions", "directions", Flag::kInteger}}},
      {"oracle",
       {{"fixture", "fixture", Flag::kString},
        {"r", "r", Flag::kNumber},
        {"pairs", "pairs", Flag::kInteger},
        {"alphas", "alphas", Flag::kInteger},
        {"probes", "probes", Flag::kInteger}}},
      {"max-radius",
       {{"fixture", "fixture", Flag::kString},
        {"boundary-points", "boundary_points", Flag::kInteger},
        {"directions", "directions", Flag::kInteger}}},
      {"reach",
       {{"t", "t", Flag::kNumber},
        {"radius-rule", "radius_rule", Flag::kString},
        {"radius", "radius", Flag::kNumber},
        {"directions", "directions", Flag::kInteger},
        {"steps", "steps", Flag::kInteger},
        {"check-samples", "check_samples", Flag::kInteger}}},
      {"pendulum",
       {{"omega", "omega", Flag::kNumber},
        {"gamma", "gamma", Flag::kNumber},
        {"u", "u", Flag::kNumber},
        {"s", "s", Flag::kNumber},
        {"t", "t", Flag::kNumber}}},
      {"abstraction",
       {{"omega", "omega", Flag::kNumber},
        {"gamma", "gamma", Flag::kNumber},
        {"T", "T", Flag::kNumber},
        {"s", "s", Flag::kNumber},
        {"method", "method", Flag::kString},
        {"field", "field", Flag::kString},
        {"patches", "patches", Flag::kInteger},
        {"steps", "steps", Flag::kInteger},
        {"source-cell", "source_cell", Flag::kInteger},
        {"check-samples", "check_samples", Flag::kInteger}}},
  };
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [cmd, list] : flags) {
    CLI::App* sub = app.add_subcommand(cmd, "run the " + cmd + " command");
    sub->fallthrough();
    subs[cmd] = sub;
    for (const auto& f : list) sub->add_option("--" + f.name, values[cmd][f.name]);
  }
  // Reach field shortcuts: --field pendulum --omega 1 ...
  std::string reach_field;
  double reach_omega = 1.0, reach_gamma = 0.0, reach_u = 0.0, reach_init_radius = 0.0;
  std::vector<double> reach_center;
  subs["reach"]->add_option("--field", reach_field, "zero, rotation or pendulum");
  subs["reach"]->add_option("--omega", reach_omega);
  subs["reach"]->add_option("--gamma", reach_gamma);
  subs["reach"]->add_option("--u", reach_u);
  subs["reach"]->add_option("--center", reach_center)->delimiter(',');
  subs["reach"]->add_option("--init-radius", reach_init_radius);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    std::string cmd;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) cmd = name;
    }
    json config = json::object();
    if (!config_path.empty()) config = load_config(config_path);
    if (config.contains("command") && config["command"] != cmd) {
      throw ConfigError("config command '" + config["command"].get<std::string>() +
                        "' does not match subcommand '" + cmd + "'");
    }
    config["command"] = cmd;
    if (app.count("--seed")) config["seed"] = seed;
    json& sec = config[cmd];
    if (sec.is_null()) sec = json::object();
    for (const auto& f : flags.at(cmd)) {
      if (!subs[cmd]->count("--" + f.name)) continue;
      const std::string& raw = values[cmd][f.name];
      try {
        if (f.kind == Flag::kString) {
          sec[f.field] = raw;
        } else if (f.kind == Flag::kInteger) {
          sec[f.field] = std::stoll(raw);
        } else {
          sec[f.field] = std::stod(raw);
        }
      } catch (const std::logic_error&) {
        throw ConfigError("--" + f.name + ": cannot parse '" + raw + "'");
      }
    }
    if (cmd == "reach") {
      if (!reach_field.empty()) {
        sec["field"] = {{"kind", reach_field}};
        if (reach_field == "pendulum") {
          sec["field"]["omega"] = reach_omega;
          sec["field"]["gamma"] = reach_gamma;
          sec["field"]["u"] = reach_u;
        }
      }
      if (!reach_center.empty()) {
        sec["init"] = {{"center", reach_center}, {"radius", reach_init_radius}};
      }
    }
    if (!out_dir.empty()) config["output"]["dir"] = out_dir;
    if (svg) config["output"]["svg"] = true;
    const json output = config.contains("output") ? config["output"] : json::object();
    const bool want_svg = output.value("svg", false);
    const Report rep = run(config, want_svg);
    if (output.contains("dir")) write_outputs(rep, output["dir"].get<std::string>());
    std::cout << rep.to_json().dump(2) << "\n";
    return rep.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace sconvex::cli
