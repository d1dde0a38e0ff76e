#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <random>

#include "cofreq/flattening.hpp"
#include "cofreq/frequency.hpp"
#include "cofreq/homogeneous.hpp"
#include "cofreq/io.hpp"
#include "cofreq/singular.hpp"
#include "suite.hpp"

namespace cofreq::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  const ExperimentConfig &cfg;
  fs::path out;
  unsigned long seed;
  RunReport &report;

  std::string artifact(const std::string &name) {
    report.artifacts.push_back(name);
    return (out / name).string();
  }
  CheckRecord &check(const std::string &name, bool pass, double measured, const std::string &cmp, double tol) {
    CheckRecord c;
    c.name = name;
    c.pass = pass;
    c.measured = measured;
    c.comparison = cmp;
    c.tolerance = tol;
    report.checks.push_back(c);
    return report.checks.back();
  }
};

struct Solution {
  std::shared_ptr<const Field> u;
  AmbientConfig ambient;
  double Lambda = -1;  // negative for a mix of several homogeneities
  Vec center;
};

Solution solution(Context &ctx) {
  Solution s;
  s.u = build_solution(ctx.cfg, ctx.seed, s.ambient, s.Lambda);
  s.center = Vec::Zero(s.ambient.n);
  if (!ctx.cfg.center.empty()) {
    if (static_cast<int>(ctx.cfg.center.size()) != s.ambient.n) throw ConfigError("center must have n coordinates");
    s.center = Eigen::Map<const Vec>(ctx.cfg.center.data(), s.ambient.n);
  }
  return s;
}

void require_quadrature(const AmbientConfig &a) {
  if (a.n > 6) throw ConfigError("this command integrates over spheres and needs n <= 6");
}

FrequencyOptions frequency_options(const ExperimentConfig &cfg) {
  FrequencyOptions o;
  o.quad.theta_nodes = cfg.frequency.theta_nodes;
  o.quad.s1_nodes = cfg.frequency.s1_nodes;
  const std::string &r = cfg.frequency.route;
  o.route = r == "bulk" ? EnergyRoute::Bulk : r == "flux" ? EnergyRoute::Flux : EnergyRoute::Auto;
  return o;
}

SingularOptions singular_options(const ExperimentConfig &cfg) {
  SingularOptions o;
  o.tau_u = cfg.singular.tau_u;
  o.tau_g = cfg.singular.tau_g;
  o.Lambda_hat = cfg.singular.Lambda_hat;
  o.boundary = cfg.singular.boundary;
  return o;
}

SingularSample sample(Context &ctx, const Solution &s) {
  return sample_singular_set(*s.u, s.center, ctx.cfg.singular.r0, ctx.cfg.singular.pitch, s.ambient,
                             singular_options(ctx.cfg));
}

void cmd_gallery(Context &ctx) {
  const Solution s = solution(ctx);
  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0, 1);
  const int n = s.ambient.n, d = s.ambient.d;
  double worst = 0;
  int done = 0;
  while (done < 1000) {
    Vec X(n);
    for (int i = 0; i < n; ++i) X(i) = nd(rng);
    X *= std::pow(ud(rng), 1.0 / n) / X.norm();
    if (X.tail(n - d).norm() <= 0.05) continue;
    worst = std::max(worst, std::abs(pde_residual(*s.u, X, s.ambient)));
    ++done;
  }
  nlohmann::json doc = nlohmann::json::array();
  for (const auto &t : ctx.cfg.solution) {
    HomogeneousSolution h(ctx.cfg.ambient, 1.0);
    if (t.kind == "gallery") h = gallery(t.name, ctx.cfg.ambient);
    else if (t.kind == "distance") h = distance_solution(ctx.cfg.ambient);
    else if (t.kind == "mode") h = pure_mode(ctx.cfg.ambient, t.j, t.harmonic);
    else h = random_solution(ctx.cfg.ambient, t.Lambda_max, t.seed + ctx.seed);
    doc.push_back({{"coeff", t.coeff}, {"solution", cofreq::to_json(h)}});
  }
  write_json(ctx.artifact("solution.json"), doc);
  ctx.check("pde_residual", worst < 1e-8, worst, "<", 1e-8).info = {{"points", 1000}, {"delta_min", 0.05}};
}

FrequencyProfile scan(Context &ctx, const Solution &s) {
  require_quadrature(s.ambient);
  const auto &F = ctx.cfg.frequency;
  return frequency_profile(*s.u, s.center, geometric_radii(F.r_min, F.r_max, F.ratio), s.ambient,
                           frequency_options(ctx.cfg));
}

void cmd_freq_scan(Context &ctx) {
  const Solution s = solution(ctx);
  const FrequencyProfile P = scan(ctx, s);
  write_profile_csv(ctx.artifact("profile.csv"), P);
  write_json(ctx.artifact("profile.json"), cofreq::to_json(P));
  std::vector<PlotSeries> series = {{"N(r)", P.radii, P.N, false, false}};
  if (s.Lambda > 0) series.push_back({"Lambda", {P.radii.front(), P.radii.back()}, {s.Lambda, s.Lambda}, false, true});
  PlotOptions po;
  po.title = "frequency";
  po.xlabel = "r";
  po.ylabel = "N";
  po.logx = true;
  emit_plot(series, ctx.artifact("frequency.svg"), po);

  double drop = 0;
  for (size_t i = 0; i + 1 < P.N.size(); ++i) drop = std::max(drop, P.N[i] - P.N[i + 1]);
  const double mt = ctx.cfg.frequency.monotonicity_tol;
  ctx.check("monotonicity", drop <= mt, drop, "<=", mt).info = {{"metric", "max decrease of N between radii"}};
  if (s.Lambda > 0) {
    double dev = 0;
    for (double N : P.N) dev = std::max(dev, std::abs(N - s.Lambda));
    const double rt = ctx.cfg.frequency.rigidity_tol;
    ctx.check("rigidity", dev < rt, dev, "<", rt).info = {{"Lambda", s.Lambda}};
  }
}

void cmd_pinch(Context &ctx) {
  const Solution s = solution(ctx);
  require_quadrature(s.ambient);
  const auto &p = ctx.cfg.pinch;
  FrequencyOptions fo = frequency_options(ctx.cfg);
  const FrequencyProfile P =
      frequency_profile(*s.u, s.center, geometric_radii(p.r1, p.r2, ctx.cfg.frequency.ratio), s.ambient, fo);
  const double Lambda = p.Lambda > 0 ? p.Lambda : s.Lambda > 0 ? s.Lambda : P.N.back();
  const PinchReport R = pinch_detect(P, Lambda, p.epsilon_pinch, p.r1, p.r2);
  write_profile_csv(ctx.artifact("profile.csv"), P);
  write_json(ctx.artifact("pinch.json"), cofreq::to_json(R));
  ctx.check("pinched", R.pinched, R.max_deviation, "<=", p.epsilon_pinch).info = {{"Lambda", Lambda}};
}

void cmd_singset(Context &ctx) {
  const Solution s = solution(ctx);
  const SingularSample S = sample(ctx, s);
  write_sample_csv(ctx.artifact("sample.csv"), S);
  write_json(ctx.artifact("sample.json"), cofreq::to_json(S));
  // threshold invariant recomputed from the stored normalization
  const double ratio = S.pitch / S.r0;
  const double u_thr = S.tau_u * S.u_scale * std::pow(ratio, S.Lambda_hat);
  const double g_thr = S.tau_g * (S.u_scale / S.r0) * std::pow(ratio, S.Lambda_hat - 1);
  double worst = 0;
  for (const Vec &Z : S.points) {
    double v;
    Vec g;
    s.u->value_gradient(Z, v, g);
    worst = std::max({worst, std::abs(v) / u_thr, g.norm() / g_thr});
  }
  ctx.check("threshold_invariant", worst <= 1.0, worst, "<=", 1.0).info = {
      {"metric", "max of |u|/u_threshold and |grad u|/grad_threshold over off-boundary points"},
      {"points", S.points.size()},
      {"boundary_points", S.boundary_points.size()}};
}

void cmd_minkowski(Context &ctx) {
  const Solution s = solution(ctx);
  const SingularSample S = sample(ctx, s);
  MinkowskiOptions mo;
  mo.mc_points = ctx.cfg.minkowski.mc_points;
  mo.seed = ctx.seed + 6;
  // volumes are measured where every s-tube lies inside the sampled window
  const double window = S.r0 - *std::max_element(ctx.cfg.minkowski.s.begin(), ctx.cfg.minkowski.s.end());
  if (!(window > 0)) throw ConfigError("minkowski scales must be smaller than singular.r0");
  const MinkowskiEstimate E =
      minkowski_content(S.all_points(), S.pitch, ctx.cfg.minkowski.s, s.center, window, s.ambient, mo);
  write_sample_csv(ctx.artifact("sample.csv"), S);
  write_minkowski_csv(ctx.artifact("minkowski.csv"), E);
  write_json(ctx.artifact("minkowski.json"), cofreq::to_json(E));
  if (!E.empty) {
    std::vector<double> ref;
    for (double x : E.s) ref.push_back(E.volume.front() * std::pow(x / E.s.front(), ctx.cfg.minkowski.slope));
    PlotOptions po;
    po.title = "Minkowski volume";
    po.xlabel = "s";
    po.ylabel = "volume";
    po.logx = po.logy = true;
    emit_plot({{"volume", E.s, E.volume, true, false}, {"reference slope", E.s, ref, false, true}},
              ctx.artifact("minkowski.svg"), po);
  }
  const double dev = E.empty ? INFINITY : std::abs(E.slope - ctx.cfg.minkowski.slope);
  ctx.check("minkowski_slope", dev <= ctx.cfg.minkowski.slope_tol, dev, "<=", ctx.cfg.minkowski.slope_tol).info = {
      {"slope", E.empty ? nlohmann::json(nullptr) : nlohmann::json(E.slope)}, {"target", ctx.cfg.minkowski.slope}};
}

void cmd_cone(Context &ctx) {
  const Solution s = solution(ctx);
  const SingularSample S = sample(ctx, s);
  const auto F = sphere_trace(S.all_points(), s.center, ctx.cfg.cone.trace_r_min);
  PlaneSearchOptions po;
  po.seed = ctx.seed + 11;
  const AvoidingPlane P = find_avoiding_2plane(F, ctx.cfg.cone.delta, po);
  ConeOptions co;
  co.seed = ctx.seed + 13;
  co.outlier_fraction = ctx.cfg.cone.outlier_fraction;
  std::vector<Vec> pts;
  for (const Vec &p : S.points) pts.push_back(p - s.center);
  const ConeFit C = cone_fit(pts, s.center.head(s.ambient.d), s.ambient, co);
  write_json(ctx.artifact("cone.json"), {{"trace_points", F.size()},
                                         {"avoiding_plane", cofreq::to_json(P)},
                                         {"cone", cofreq::to_json(C)}});
  ctx.check("avoiding_plane", P.success && P.margin >= ctx.cfg.cone.delta, P.margin, ">=", ctx.cfg.cone.delta);
  ctx.check("cone_aperture", C.alpha < 1.0, C.alpha, "<", 1.0);
}

GraphDomain graph(const ExperimentConfig &cfg) {
  const auto &F = cfg.flatten;
  const AmbientConfig &a = cfg.ambient;
  if (F.family == "flat") return GraphDomain::flat(a, F.r0);
  if (F.family == "linear") {
    Mat L(a.m(), a.d);
    for (int i = 0; i < a.m(); ++i)
      for (int j = 0; j < a.d; ++j) L(i, j) = F.L[i][j];
    return GraphDomain::linear(a, L, F.r0);
  }
  if (F.family == "paraboloid") return GraphDomain::paraboloid(a, F.kappa, F.r0);
  return GraphDomain::trig_bump(a, F.a, F.k, F.r0);
}

void cmd_flatten_check(Context &ctx) {
  const auto &F = ctx.cfg.flatten;
  FlatteningOptions fo;
  fo.beta = F.beta;
  fo.epsilon = F.epsilon;
  fo.M = F.M;
  FlatteningMap map = [&] {
    try {
      return build_flattening(graph(ctx.cfg), fo);
    } catch (const std::invalid_argument &e) {
      throw ConfigError(std::string("flatten: ") + e.what());
    }
  }();
  const AmbientConfig &a = ctx.cfg.ambient;
  C01Options co;
  co.delta_lo = F.delta_lo;
  co.delta_hi = F.delta_hi;
  co.shells = F.shells;
  co.points_per_shell = F.points_per_shell;
  co.slope_threshold = F.slope_threshold;
  co.seed = ctx.seed + 19;
  const C01Report R = check_C01([&](const Vec &X) { return conjugated_matrix(map, X); }, a, co);
  const BiLipschitzReport B = bilipschitz_ratio(map, F.bilipschitz_points, F.delta_hi, ctx.seed + 17);
  write_json(ctx.artifact("c01.json"), {{"c01", cofreq::to_json(R)},
                                        {"bilipschitz", cofreq::to_json(B)},
                                        {"c_beta", map.cbeta()},
                                        {"achieved_epsilon", map.achieved_epsilon()},
                                        {"suggested_window", map.suggested_window()}});
  write_shells_csv(ctx.artifact("shells.csv"), R);
  if (!R.exact) {
    std::vector<double> x, y;
    for (const auto &sh : R.shells) {
      x.push_back(std::sqrt(sh.delta_lo * sh.delta_hi));
      y.push_back(sh.defect);
    }
    PlotOptions po;
    po.title = "trace defect";
    po.xlabel = "delta";
    po.ylabel = "max |A - B|";
    po.logx = po.logy = true;
    emit_plot({{"defect", x, y, true, false}}, ctx.artifact("c01.svg"), po);
  }
  ctx.check("c01_slope", R.pass, R.slope, ">=", F.slope_threshold).info = {{"C", R.C}, {"C_variation", R.C_variation}};
  const double eps = map.achieved_epsilon(), band = F.bilipschitz_C * eps;
  const double dev = std::max(1 - B.lower, B.upper - 1);
  ctx.check("bilipschitz", dev <= band, dev, "<=", band).info = {
      {"metric", "max deviation of the ratio to the flat model from 1"}, {"pairs", B.pairs}, {"epsilon", eps}};
}

void cmd_annulus(Context &ctx) {
  const Solution s = solution(ctx);
  require_quadrature(s.ambient);
  const auto &A = ctx.cfg.annulus;
  auto f = [&](const Vec &X) { return s.u->value(s.center + X); };
  const AnnulusSolution S = solve_annulus(f, f, A.rho, A.R, s.ambient, A.Lambda_max);
  // u itself solves the problem when its homogeneities stay below Lambda_max
  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(A.rho, A.R);
  double worst = 0, scale = 0;
  for (int k = 0; k < 200; ++k) {
    Vec th(s.ambient.n);
    for (int i = 0; i < th.size(); ++i) th(i) = nd(rng);
    const Vec X = ud(rng) * th.normalized();
    const double want = f(X);
    scale = std::max(scale, std::abs(want));
    worst = std::max(worst, std::abs(S.value(X) - want));
  }
  const double rel = worst / std::max(scale, 1e-300);
  nlohmann::json blocks = nlohmann::json::array();
  for (size_t k = 0; k < S.blocks.size(); ++k) {
    nlohmann::json ab = nlohmann::json::array();
    for (const auto &[a, b] : S.ab[k]) ab.push_back({a, b});
    blocks.push_back({{"Lambda", S.blocks[k].Lambda}, {"ab", ab}});
  }
  write_json(ctx.artifact("annulus.json"),
             {{"rho", A.rho}, {"R", A.R}, {"Lambda_max", A.Lambda_max}, {"blocks", blocks}, {"warnings", S.warnings}});
  ctx.check("annulus_reproduction", rel < A.tol && S.warnings.empty(), rel, "<", A.tol).info = {
      {"metric", "max |solution - u| / max |u| at 200 interior points"}};
}

void cmd_validate(Context &ctx) {
  suite::SuiteOptions so;
  so.seed = ctx.seed;
  nlohmann::json all = nlohmann::json::array();
  for (int id : ctx.cfg.validate.criteria) {
    const suite::CheckResult r = suite::run_criterion(id, so);
    all.push_back(suite::to_json(r));
    ctx.check("criterion_" + std::to_string(id), r.pass, r.measured, r.comparison, r.tolerance).info = {
        {"name", r.name}, {"metric", r.metric}, {"details", r.details}};
  }
  write_json(ctx.artifact("validate.json"), all);
}

const std::map<std::string, std::function<void(Context &)>> &table() {
  static const std::map<std::string, std::function<void(Context &)>> t = {
      {"gallery", cmd_gallery},     {"freq-scan", cmd_freq_scan}, {"pinch", cmd_pinch},
      {"singset", cmd_singset},     {"minkowski", cmd_minkowski}, {"cone", cmd_cone},
      {"flatten-check", cmd_flatten_check}, {"annulus", cmd_annulus}, {"validate", cmd_validate}};
  return t;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

bool RunReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord &c) { return c.pass; });
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto &c : checks)
    cs.push_back({{"name", c.name},
                  {"pass", c.pass},
                  {"measured", finite_or_null(c.measured)},
                  {"comparison", c.comparison},
                  {"tolerance", c.tolerance},
                  {"info", c.info}});
  return {{"command", command}, {"seed", seed},     {"config", config},
          {"checks", cs},       {"artifacts", artifacts}, {"pass", pass()}};
}

const std::vector<std::string> &command_names() {
  static const std::vector<std::string> names = {"gallery", "freq-scan",     "pinch",   "singset", "minkowski",
                                                 "cone",    "flatten-check", "annulus", "validate"};
  return names;
}

RunReport run_command(const std::string &command, const ExperimentConfig &cfg, const std::string &out_dir,
                      unsigned long seed) {
  const auto it = table().find(command);
  if (it == table().end()) throw ConfigError("unknown command '" + command + "'");
  fs::create_directories(out_dir);
  RunReport report;
  report.command = command;
  report.seed = seed;
  report.config = to_json(cfg);
  Context ctx{cfg, fs::path(out_dir), seed, report};
  it->second(ctx);
  report.artifacts.push_back("report.json");
  write_json((fs::path(out_dir) / "report.json").string(), report.to_json());
  return report;
}

}  // namespace cofreq::cli
