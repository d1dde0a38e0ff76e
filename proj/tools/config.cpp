#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cofreq/homogeneous.hpp"

namespace cofreq::cli {

namespace {

std::string at(const YAML::Node &n) {
  const auto m = n.Mark();
  return m.line >= 0 ? "line " + std::to_string(m.line + 1) + ": " : "";
}

void require_map(const YAML::Node &n, const std::string &where) {
  if (!n.IsMap()) throw ConfigError(at(n) + "'" + where + "' must be a table");
}

void check_keys(const YAML::Node &n, const std::string &where, const std::set<std::string> &allowed) {
  require_map(n, where);
  for (const auto &kv : n) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      std::string list;
      for (const auto &a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(at(kv.first) + "unknown key '" + key + "' in " + where + " (expected one of: " + list + ")");
    }
  }
}

template <class T>
void get(const YAML::Node &map, const char *key, T &out) {
  const YAML::Node v = map[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception &) {
    throw ConfigError(at(v) + "'" + key + "' has the wrong type");
  }
}

void positive(const YAML::Node &map, const char *key, double v) {
  if (!(v > 0)) throw ConfigError(at(map[key] ? map[key] : map) + "'" + key + "' must be positive");
}

void parse_term(const YAML::Node &n, TermSpec &t) {
  check_keys(n, "solution term", {"kind", "name", "j", "harmonic", "Lambda_max", "seed", "coeff"});
  get(n, "kind", t.kind);
  get(n, "name", t.name);
  get(n, "j", t.j);
  get(n, "harmonic", t.harmonic);
  get(n, "Lambda_max", t.Lambda_max);
  get(n, "seed", t.seed);
  get(n, "coeff", t.coeff);
  static const std::set<std::string> kinds = {"gallery", "distance", "mode", "random"};
  if (!kinds.count(t.kind)) throw ConfigError(at(n["kind"]) + "unknown solution kind '" + t.kind + "'");
  if (t.kind == "gallery") {
    const auto names = gallery_names();
    if (std::find(names.begin(), names.end(), t.name) == names.end())
      throw ConfigError(at(n["name"] ? n["name"] : n) + "unknown gallery entry '" + t.name + "'");
  }
  if (t.kind == "mode" && t.j < 1) throw ConfigError(at(n["j"]) + "mode index j must be at least 1");
}

}  // namespace

ExperimentConfig parse_config(const std::string &text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException &e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  check_keys(root, "the document",
             {"ambient", "solution", "center", "frequency", "pinch", "singular", "minkowski", "cone", "flatten", "annulus",
              "validate"});

  if (const auto a = root["ambient"]) {
    check_keys(a, "ambient", {"n", "d"});
    get(a, "n", c.ambient.n);
    get(a, "d", c.ambient.d);
    try {
      c.ambient.validate();
    } catch (const std::invalid_argument &e) {
      throw ConfigError(at(a) + e.what());
    }
  }
  if (const auto s = root["solution"]) {
    c.solution.clear();
    if (s.IsSequence()) {
      for (const auto &t : s) parse_term(t, c.solution.emplace_back());
      if (c.solution.empty()) throw ConfigError(at(s) + "solution needs at least one term");
    } else {
      parse_term(s, c.solution.emplace_back());
    }
  }
  get(root, "center", c.center);

  if (const auto f = root["frequency"]) {
    check_keys(f, "frequency", {"r_min", "r_max", "ratio", "route", "theta_nodes", "s1_nodes", "monotonicity_tol", "rigidity_tol"});
    auto &F = c.frequency;
    get(f, "r_min", F.r_min);
    get(f, "r_max", F.r_max);
    get(f, "ratio", F.ratio);
    get(f, "route", F.route);
    get(f, "theta_nodes", F.theta_nodes);
    get(f, "s1_nodes", F.s1_nodes);
    get(f, "monotonicity_tol", F.monotonicity_tol);
    get(f, "rigidity_tol", F.rigidity_tol);
    positive(f, "r_min", F.r_min);
    if (!(F.r_max > F.r_min)) throw ConfigError(at(f) + "frequency needs r_min < r_max");
    if (!(F.ratio > 1)) throw ConfigError(at(f["ratio"] ? f["ratio"] : f) + "'ratio' must exceed 1");
    if (F.route != "auto" && F.route != "bulk" && F.route != "flux")
      throw ConfigError(at(f["route"]) + "route must be auto, bulk or flux");
  }
  if (const auto p = root["pinch"]) {
    check_keys(p, "pinch", {"Lambda", "epsilon_pinch", "r1", "r2"});
    get(p, "Lambda", c.pinch.Lambda);
    get(p, "epsilon_pinch", c.pinch.epsilon_pinch);
    get(p, "r1", c.pinch.r1);
    get(p, "r2", c.pinch.r2);
    positive(p, "epsilon_pinch", c.pinch.epsilon_pinch);
    positive(p, "r1", c.pinch.r1);
    if (!(c.pinch.r2 > c.pinch.r1)) throw ConfigError(at(p) + "pinch needs r1 < r2");
  }
  if (const auto s = root["singular"]) {
    check_keys(s, "singular", {"r0", "pitch", "tau_u", "tau_g", "Lambda_hat", "boundary"});
    auto &S = c.singular;
    get(s, "r0", S.r0);
    get(s, "pitch", S.pitch);
    get(s, "tau_u", S.tau_u);
    get(s, "tau_g", S.tau_g);
    get(s, "Lambda_hat", S.Lambda_hat);
    get(s, "boundary", S.boundary);
    positive(s, "r0", S.r0);
    positive(s, "pitch", S.pitch);
    if (S.pitch > S.r0) throw ConfigError(at(s["pitch"]) + "pitch must not exceed r0");
  }
  if (const auto m = root["minkowski"]) {
    check_keys(m, "minkowski", {"s", "mc_points", "slope", "slope_tol"});
    get(m, "s", c.minkowski.s);
    get(m, "mc_points", c.minkowski.mc_points);
    get(m, "slope", c.minkowski.slope);
    get(m, "slope_tol", c.minkowski.slope_tol);
    if (c.minkowski.s.size() < 2) throw ConfigError(at(m) + "minkowski needs at least two scales s");
  }
  if (const auto k = root["cone"]) {
    check_keys(k, "cone", {"delta", "trace_r_min", "outlier_fraction"});
    get(k, "delta", c.cone.delta);
    get(k, "trace_r_min", c.cone.trace_r_min);
    get(k, "outlier_fraction", c.cone.outlier_fraction);
  }
  if (const auto f = root["flatten"]) {
    check_keys(f, "flatten",
               {"family", "kappa", "a", "k", "L", "r0", "beta", "epsilon", "M", "delta_lo", "delta_hi", "shells",
                "points_per_shell", "slope_threshold", "bilipschitz_points", "bilipschitz_C"});
    auto &F = c.flatten;
    get(f, "family", F.family);
    get(f, "kappa", F.kappa);
    get(f, "a", F.a);
    get(f, "k", F.k);
    get(f, "L", F.L);
    get(f, "r0", F.r0);
    get(f, "beta", F.beta);
    get(f, "epsilon", F.epsilon);
    get(f, "M", F.M);
    get(f, "delta_lo", F.delta_lo);
    get(f, "delta_hi", F.delta_hi);
    get(f, "shells", F.shells);
    get(f, "points_per_shell", F.points_per_shell);
    get(f, "slope_threshold", F.slope_threshold);
    get(f, "bilipschitz_points", F.bilipschitz_points);
    get(f, "bilipschitz_C", F.bilipschitz_C);
    static const std::set<std::string> fams = {"flat", "linear", "paraboloid", "trig_bump"};
    if (!fams.count(F.family)) throw ConfigError(at(f["family"]) + "unknown graph family '" + F.family + "'");
    positive(f, "beta", F.beta);
    positive(f, "epsilon", F.epsilon);
    positive(f, "r0", F.r0);
    if (!(F.delta_hi > F.delta_lo && F.delta_lo > 0)) throw ConfigError(at(f) + "flatten needs 0 < delta_lo < delta_hi");
    if (F.family == "linear") {
      if (static_cast<int>(F.L.size()) != c.ambient.m()) throw ConfigError(at(f["L"] ? f["L"] : f) + "L must have m rows");
      for (const auto &row : F.L)
        if (static_cast<int>(row.size()) != c.ambient.d) throw ConfigError(at(f["L"]) + "L must have d columns");
    }
  }
  if (const auto a = root["annulus"]) {
    check_keys(a, "annulus", {"rho", "R", "Lambda_max", "tol"});
    get(a, "rho", c.annulus.rho);
    get(a, "R", c.annulus.R);
    get(a, "Lambda_max", c.annulus.Lambda_max);
    get(a, "tol", c.annulus.tol);
    if (!(0 < c.annulus.rho && c.annulus.rho < c.annulus.R)) throw ConfigError(at(a) + "annulus needs 0 < rho < R");
  }
  if (const auto v = root["validate"]) {
    check_keys(v, "validate", {"criteria"});
    get(v, "criteria", c.validate.criteria);
    for (int id : c.validate.criteria)
      if (id < 1 || id > 10) throw ConfigError(at(v["criteria"]) + "criteria are numbered 1 to 10");
  }
  if (!c.center.empty() && static_cast<int>(c.center.size()) != c.ambient.n)
    throw ConfigError(at(root["center"]) + "center must have n coordinates");
  return c;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json to_json(const ExperimentConfig &c) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto &t : c.solution) {
    nlohmann::json j = {{"kind", t.kind}, {"coeff", t.coeff}};
    if (t.kind == "gallery") j["name"] = t.name;
    if (t.kind == "mode") {
      j["j"] = t.j;
      j["harmonic"] = t.harmonic;
    }
    if (t.kind == "random") {
      j["Lambda_max"] = t.Lambda_max;
      j["seed"] = t.seed;
    }
    terms.push_back(j);
  }
  const auto &F = c.flatten;
  return {
      {"ambient", {{"n", c.ambient.n}, {"d", c.ambient.d}}},
      {"solution", terms},
      {"center", c.center},
      {"frequency",
       {{"r_min", c.frequency.r_min}, {"r_max", c.frequency.r_max}, {"ratio", c.frequency.ratio},
        {"route", c.frequency.route}, {"theta_nodes", c.frequency.theta_nodes}, {"s1_nodes", c.frequency.s1_nodes},
        {"monotonicity_tol", c.frequency.monotonicity_tol}, {"rigidity_tol", c.frequency.rigidity_tol}}},
      {"pinch",
       {{"Lambda", c.pinch.Lambda}, {"epsilon_pinch", c.pinch.epsilon_pinch}, {"r1", c.pinch.r1}, {"r2", c.pinch.r2}}},
      {"singular",
       {{"r0", c.singular.r0}, {"pitch", c.singular.pitch}, {"tau_u", c.singular.tau_u}, {"tau_g", c.singular.tau_g},
        {"Lambda_hat", c.singular.Lambda_hat}, {"boundary", c.singular.boundary}}},
      {"minkowski",
       {{"s", c.minkowski.s}, {"mc_points", c.minkowski.mc_points}, {"slope", c.minkowski.slope},
        {"slope_tol", c.minkowski.slope_tol}}},
      {"cone",
       {{"delta", c.cone.delta}, {"trace_r_min", c.cone.trace_r_min}, {"outlier_fraction", c.cone.outlier_fraction}}},
      {"flatten",
       {{"family", F.family}, {"kappa", F.kappa}, {"a", F.a}, {"k", F.k}, {"L", F.L}, {"r0", F.r0}, {"beta", F.beta},
        {"epsilon", F.epsilon}, {"M", F.M}, {"delta_lo", F.delta_lo}, {"delta_hi", F.delta_hi}, {"shells", F.shells},
        {"points_per_shell", F.points_per_shell}, {"slope_threshold", F.slope_threshold},
        {"bilipschitz_points", F.bilipschitz_points}, {"bilipschitz_C", F.bilipschitz_C}}},
      {"annulus",
       {{"rho", c.annulus.rho}, {"R", c.annulus.R}, {"Lambda_max", c.annulus.Lambda_max}, {"tol", c.annulus.tol}}},
      {"validate", {{"criteria", c.validate.criteria}}},
  };
}

std::shared_ptr<const Field> build_solution(const ExperimentConfig &cfg, unsigned long seed, AmbientConfig &ambient,
                                            double &Lambda) {
  ambient = cfg.ambient;
  std::vector<std::pair<double, HomogeneousSolution>> parts;
  for (const auto &t : cfg.solution) {
    HomogeneousSolution u(cfg.ambient, 1.0);
    try {
      if (t.kind == "gallery") u = gallery(t.name, cfg.ambient);
      else if (t.kind == "distance") u = distance_solution(cfg.ambient);
      else if (t.kind == "mode") u = pure_mode(cfg.ambient, t.j, t.harmonic);
      else u = random_solution(cfg.ambient, t.Lambda_max, t.seed + seed);
    } catch (const std::invalid_argument &e) {
      throw ConfigError(std::string("solution term '") + t.kind + "': " + e.what());
    }
    parts.emplace_back(t.coeff, u);
  }
  if (parts.size() == 1 && parts[0].first == 1.0) {
    ambient = parts[0].second.config();
    Lambda = parts[0].second.Lambda();
    return std::make_shared<HomogeneousSolution>(parts[0].second);
  }
  for (const auto &p : parts)
    if (p.second.config().n != cfg.ambient.n) throw ConfigError("a mix cannot contain mixed-parity, which has its own ambient");
  auto mix = std::make_shared<SolutionMix>(cfg.ambient);
  for (const auto &[c, u] : parts) mix->add(u, c);
  Lambda = parts.size() == 1 ? parts[0].second.Lambda() : -1.0;
  return mix;
}

}  // namespace cofreq::cli
