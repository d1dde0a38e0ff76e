#include "cofreq/homogeneous.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cofreq {

namespace {

constexpr double kWitnessTol = 1e-9;

bool near_integer(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol; }

double witness_defect(double Lambda, int k, int j, int m) {
  const double lam = static_cast<double>(eigenvalue(j, m));
  return std::abs((Lambda - k) * (Lambda - k - 1) - lam) / (1.0 + lam);
}

// Real part of (t1 + i t2)^j as a polynomial in m variables.
Polynomial planar_harmonic(int m, int j) {
  Polynomial p(m);
  for (int a = 0; a <= j; a += 2) {
    // binom(j, a) t1^{j-a} (i t2)^a, real part sign (-1)^{a/2}
    double b = 1.0;
    for (int i = 1; i <= a; ++i) b = b * (j - a + i) / i;
    Exponent e(m, 0);
    e[0] = j - a;
    if (m > 1) e[1] = a;
    p.add_term(e, ((a / 2) % 2 ? -1.0 : 1.0) * b);
  }
  return p;
}

}  // namespace

double gamma_j(int j, int m) {
  const double lam = static_cast<double>(eigenvalue(j, m));
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * lam));
}

int mode_cutoff(double Lambda, int m) {
  int N = 0;
  while (static_cast<double>(eigenvalue(N, m)) <= Lambda * Lambda) ++N;
  return N;
}

bool FrequencyEntry::is_integer() const {
  for (const auto &w : witnesses)
    if (w.integer) return true;
  return false;
}

const FrequencyEntry *FrequencySet::find(double Lambda, double tol) const {
  for (const auto &e : entries)
    if (std::abs(e.Lambda - Lambda) <= tol * std::max(1.0, Lambda)) return &e;
  return nullptr;
}

FrequencySet frequency_set(const AmbientConfig &cfg, double Lambda_max) {
  cfg.validate_relaxed();
  if (!(Lambda_max >= 1.0)) throw std::invalid_argument("Lambda_max must be at least 1");
  const int m = cfg.m();
  std::vector<std::pair<double, Witness>> raw;
  for (int L = 1; L <= static_cast<int>(std::floor(Lambda_max + 1e-12)); ++L) raw.push_back({double(L), {true, L - 1, 0}});
  for (int j = 1;; ++j) {
    const double g = gamma_j(j, m);
    if (g > Lambda_max + 1e-12) break;
    for (int k = 0; k + g <= Lambda_max + 1e-12; ++k) raw.push_back({k + g, {false, k, j}});
  }
  std::stable_sort(raw.begin(), raw.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
  FrequencySet F;
  F.cfg = cfg;
  F.Lambda_max = Lambda_max;
  for (const auto &[L, w] : raw) {
    if (!F.entries.empty() && std::abs(F.entries.back().Lambda - L) <= 1e-9 * std::max(1.0, L)) {
      F.entries.back().witnesses.push_back(w);
      if (w.integer) F.entries.back().Lambda = L;  // keep the exact integer
    } else {
      F.entries.push_back({L, {w}});
    }
  }
  return F;
}

TermField Mode::field(int d) const {
  TermField f(d, phi.m);
  for (const auto &[k, b] : coeffs) f.add(Term{1.0, b, phi.poly, Lambda - k - j});
  return f;
}

Mode build_mode(double Lambda, int j, const Polynomial &seed, const SphericalHarmonic &phi, const AmbientConfig &cfg) {
  cfg.validate_relaxed();
  const int m = cfg.m();
  if (seed.nvars() != cfg.d) throw std::invalid_argument("seed must be a polynomial in d variables");
  if (seed.is_zero()) throw std::invalid_argument("seed polynomial is zero");
  if (!seed.is_homogeneous()) throw std::invalid_argument("seed polynomial must be homogeneous");
  if (phi.m != m || phi.degree != j) throw std::invalid_argument("harmonic does not match (j, m)");
  const int k = seed.degree();
  const double lam = static_cast<double>(eigenvalue(j, m));
  if (witness_defect(Lambda, k, j, m) > kWitnessTol)
    throw std::invalid_argument("frequency condition violated for witness (k=" + std::to_string(k) +
                                ", j=" + std::to_string(j) + "): (Lambda-k)(Lambda-k-1) = " +
                                std::to_string((Lambda - k) * (Lambda - k - 1)) + " != lambda_j = " +
                                std::to_string(lam));
  if (j == 0 && std::abs(Lambda - k - 1) > kWitnessTol)
    throw std::invalid_argument("j = 0 modes start at r^1: need deg(seed) = Lambda - 1");
  if (j > 0 && Lambda - k < 0.5)
    throw std::invalid_argument("witness selects the negative root; the mode would blow up on R^d");

  Mode mode;
  mode.Lambda = Lambda;
  mode.j = j;
  mode.phi = phi;
  mode.k_top = k;
  const double scale = j == 0 ? 1.0 / phi.poly(Vec::Zero(m)) : 1.0;
  Polynomial b = seed * scale;
  mode.coeffs.push_back({k, b});
  for (int kk = k; kk >= 2; kk -= 2) {
    const Polynomial L = b.laplacian();
    if (L.is_zero() || L.max_abs_coefficient() <= 1e-15 * b.max_abs_coefficient()) break;
    const double div = (Lambda - kk + 2) * (Lambda - kk + 1) - lam;
    if (std::abs(div) < 1e-12)
      throw std::logic_error("zero divisor in the coefficient recursion at k=" + std::to_string(kk) +
                             "; Lambda bookkeeping is inconsistent");
    b = L * (-1.0 / div);
    mode.coeffs.push_back({kk - 2, b});
  }
  return mode;
}

Mode build_mode(double Lambda, int j, const Polynomial &seed, const AmbientConfig &cfg, int harmonic_index) {
  const auto basis = harmonic_basis(j, cfg.m());
  if (harmonic_index < 0 || harmonic_index >= static_cast<int>(basis.size()))
    throw std::invalid_argument("harmonic index out of range");
  return build_mode(Lambda, j, seed, basis[harmonic_index], cfg);
}

HomogeneousSolution::HomogeneousSolution(const AmbientConfig &cfg, double Lambda)
    : cfg_(cfg), Lambda_(Lambda), field_(cfg.d, cfg.m()) {
  cfg.validate_relaxed();
}

void HomogeneousSolution::add_mode(const Mode &mode, double scale) {
  if (std::abs(mode.Lambda - Lambda_) > 1e-12 * std::max(1.0, Lambda_))
    throw std::invalid_argument("mode homogeneity differs from the solution's");
  if (mode.phi.m != cfg_.m()) throw std::invalid_argument("mode codimension differs from the solution's");
  if ((cfg_.m() - 2) % 2 == 0 && near_integer(Lambda_) && mode.j % 2 == 1)
    throw std::logic_error("odd harmonic degree in an integer-homogeneity solution with m - 2 even");
  modes_.push_back(mode);
  scales_.push_back(scale);
  field_.add(mode.field(cfg_.d), scale);
}

void SolutionMix::add(const HomogeneousSolution &u, double c) {
  if (u.config().n != cfg_.n || u.config().d != cfg_.d) throw std::invalid_argument("mix parts must share (n, d)");
  parts_.push_back({c, u});
  field_.add(u.terms(), c);
}

HomogeneousSolution distance_solution(const AmbientConfig &cfg) {
  HomogeneousSolution u(cfg, 1.0);
  u.add_mode(build_mode(1.0, 0, Polynomial::constant(cfg.d, 1.0), cfg));
  return u;
}

HomogeneousSolution pure_mode(const AmbientConfig &cfg, int j, int harmonic_index) {
  const double g = gamma_j(j, cfg.m());
  HomogeneousSolution u(cfg, g);
  u.add_mode(build_mode(g, j, Polynomial::constant(cfg.d, 1.0), cfg, harmonic_index));
  return u;
}

std::vector<std::string> gallery_names() { return {"codim1-lift", "nonintegral", "mixed-parity", "large-singular"}; }

HomogeneousSolution gallery(const std::string &name, const AmbientConfig &cfg) {
  const int d = cfg.d;
  if (name == "codim1-lift") {
    // a(x, r) = 3 x1^2 r - r^3, harmonic in R^{d+1} and odd in r
    HomogeneousSolution u(cfg, 3.0);
    Exponent e(d, 0);
    e[0] = 2;
    u.add_mode(build_mode(3.0, 0, Polynomial::monomial(e, 3.0), cfg));
    return u;
  }
  if (name == "nonintegral") {
    const double L = 1.0 + gamma_j(1, cfg.m());
    HomogeneousSolution u(cfg, L);
    u.add_mode(build_mode(L, 1, Polynomial::variable(d, 0), cfg, 0));
    return u;
  }
  if (name == "mixed-parity") {
    const AmbientConfig big(11, 1);
    const double L = 17.0;
    HomogeneousSolution u(big, L);
    const SphericalHarmonic p2 = harmonic_from_polynomial(planar_harmonic(10, 2));
    const SphericalHarmonic p12 = harmonic_from_polynomial(planar_harmonic(10, 12));
    u.add_mode(build_mode(L, 2, Polynomial::monomial({12}), p2, big));
    u.add_mode(build_mode(L, 12, Polynomial::monomial({1}), p12, big));
    return u;
  }
  if (name == "large-singular") {
    if (d != 2) throw std::invalid_argument("large-singular needs d = 2");
    // |t| Re(x1 + i x2)^3
    Polynomial cubic(2);
    cubic.add_term({3, 0}, 1.0);
    cubic.add_term({1, 2}, -3.0);
    HomogeneousSolution u(cfg, 4.0);
    u.add_mode(build_mode(4.0, 0, cubic, cfg));
    return u;
  }
  throw std::invalid_argument("unknown gallery entry '" + name + "'");
}

std::vector<Mode> homogeneous_space_modes(const AmbientConfig &cfg, const FrequencyEntry &entry) {
  std::vector<Mode> out;
  for (const Witness &w : entry.witnesses) {
    const int j = w.integer ? 0 : w.j;
    const int k = w.integer ? static_cast<int>(std::lround(entry.Lambda)) - 1 : w.k;
    const auto basis = harmonic_basis(j, cfg.m());
    for (const Exponent &e : monomials_of_degree(cfg.d, k))
      for (const auto &phi : basis) out.push_back(build_mode(entry.Lambda, j, Polynomial::monomial(e), phi, cfg));
  }
  return out;
}

HomogeneousSolution random_solution(const AmbientConfig &cfg, const FrequencyEntry &entry, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  HomogeneousSolution u(cfg, entry.Lambda);
  for (const Witness &w : entry.witnesses) {
    const int j = w.integer ? 0 : w.j;
    const int k = w.integer ? static_cast<int>(std::lround(entry.Lambda)) - 1 : w.k;
    Polynomial s(cfg.d);
    for (const Exponent &e : monomials_of_degree(cfg.d, k)) s.add_term(e, nd(rng));
    const auto basis = harmonic_basis(j, cfg.m());
    SphericalHarmonic phi = basis[0];
    if (j > 0) {
      Polynomial p(cfg.m());
      for (const auto &b : basis) p += b.poly * nd(rng);
      phi = harmonic_from_polynomial(p);
    }
    u.add_mode(build_mode(entry.Lambda, j, s, phi, cfg), nd(rng));
  }
  return u;
}

HomogeneousSolution random_solution(const AmbientConfig &cfg, double Lambda_max, unsigned long seed) {
  std::mt19937_64 rng(seed);
  const FrequencySet F = frequency_set(cfg, Lambda_max);
  const FrequencyEntry &entry = F.entries[rng() % F.entries.size()];
  return random_solution(cfg, entry, rng);
}

SolutionMix random_mix(const AmbientConfig &cfg, double Lambda_max, int terms, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const FrequencySet F = frequency_set(cfg, Lambda_max);
  if (terms < 1 || terms > static_cast<int>(F.entries.size()))
    throw std::invalid_argument("random_mix: bad number of terms");
  std::vector<size_t> idx(F.entries.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(terms);
  std::sort(idx.begin(), idx.end());
  SolutionMix mix(cfg);
  for (size_t i : idx) mix.add(random_solution(cfg, F.entries[i], rng), nd(rng));
  return mix;
}

nlohmann::json to_json(const Polynomial &p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto &[e, c] : p.terms()) terms.push_back({{"exp", e}, {"c", c}});
  return {{"nvars", p.nvars()}, {"terms", terms}};
}

Polynomial polynomial_from_json(const nlohmann::json &j) {
  Polynomial p(j.at("nvars").get<int>());
  for (const auto &t : j.at("terms")) p.add_term(t.at("exp").get<Exponent>(), t.at("c").get<double>());
  return p;
}

nlohmann::json to_json(const HomogeneousSolution &u) {
  nlohmann::json modes = nlohmann::json::array();
  for (size_t i = 0; i < u.modes().size(); ++i) {
    const Mode &md = u.modes()[i];
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto &[k, b] : md.coeffs) coeffs.push_back({{"k", k}, {"b", to_json(b)}});
    modes.push_back({{"Lambda", md.Lambda},
                     {"j", md.j},
                     {"k_top", md.k_top},
                     {"scale", u.scales()[i]},
                     {"witness", {{"k", md.k_top}, {"j", md.j}, {"lambda_j", eigenvalue(md.j, md.phi.m)}}},
                     {"harmonic", to_json(md.phi.poly)},
                     {"coeffs", coeffs}});
  }
  return {{"n", u.config().n}, {"d", u.config().d}, {"Lambda", u.Lambda()}, {"modes", modes}};
}

HomogeneousSolution solution_from_json(const nlohmann::json &j) {
  AmbientConfig cfg(j.at("n").get<int>(), j.at("d").get<int>());
  HomogeneousSolution u(cfg, j.at("Lambda").get<double>());
  for (const auto &jm : j.at("modes")) {
    Mode md;
    md.Lambda = jm.at("Lambda").get<double>();
    md.j = jm.at("j").get<int>();
    md.k_top = jm.at("k_top").get<int>();
    md.phi.degree = md.j;
    md.phi.m = cfg.m();
    md.phi.poly = polynomial_from_json(jm.at("harmonic"));
    for (const auto &c : jm.at("coeffs")) md.coeffs.push_back({c.at("k").get<int>(), polynomial_from_json(c.at("b"))});
    if (witness_defect(md.Lambda, md.k_top, md.j, cfg.m()) > kWitnessTol)
      throw std::invalid_argument("serialized mode fails its frequency witness");
    u.add_mode(md, jm.at("scale").get<double>());
  }
  return u;
}

nlohmann::json to_json(const FrequencySet &F) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto &e : F.entries) {
    nlohmann::json ws = nlohmann::json::array();
    for (const auto &w : e.witnesses) {
      if (w.integer)
        ws.push_back("integer");
      else
        ws.push_back({{"k", w.k}, {"j", w.j}});
    }
    entries.push_back({{"Lambda", e.Lambda}, {"witnesses", ws}});
  }
  return {{"n", F.cfg.n}, {"d", F.cfg.d}, {"Lambda_max", F.Lambda_max}, {"entries", entries}};
}

}  // namespace cofreq
