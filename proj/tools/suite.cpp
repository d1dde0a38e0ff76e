#include "suite.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include <Eigen/Sparse>

#include "cofreq/flattening.hpp"
#include "cofreq/frequency.hpp"
#include "cofreq/homogeneous.hpp"
#include "cofreq/singular.hpp"

namespace cofreq::suite {

namespace {

Vec sample_ball(int n, int d, double dmin, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (;;) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(rng);
    v *= std::pow(ud(rng), 1.0 / n) / v.norm();
    if (v.tail(n - d).norm() > dmin) return v;
  }
}

double max_residual(const Field &u, const AmbientConfig &cfg, int npts, unsigned long seed) {
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int i = 0; i < npts; ++i) worst = std::max(worst, std::abs(pde_residual(u, sample_ball(cfg.n, cfg.d, 0.05, rng), cfg)));
  return worst;
}

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string cfg_name(const AmbientConfig &c) { return "n=" + std::to_string(c.n) + ",d=" + std::to_string(c.d); }

// Second-order finite differences for c'' + (d/r) c' - L(L+d-1)/r^2 c = 0 on [rho, R].
std::vector<double> radial_fd(double L, int d, double rho, double R, double c_rho, double c_R, int N) {
  const double h = (R - rho) / N;
  const double k = L * (L + d - 1);
  Eigen::SparseMatrix<double> A(N - 1, N - 1);
  Vec b = Vec::Zero(N - 1);
  std::vector<Eigen::Triplet<double>> T;
  for (int i = 1; i < N; ++i) {
    const double r = rho + i * h;
    const double lo = 1 / (h * h) - d / (2 * h * r), mid = -2 / (h * h) - k / (r * r), hi = 1 / (h * h) + d / (2 * h * r);
    T.emplace_back(i - 1, i - 1, mid);
    if (i > 1) T.emplace_back(i - 1, i - 2, lo);
    else b(0) -= lo * c_rho;
    if (i < N - 1) T.emplace_back(i - 1, i, hi);
    else b(N - 2) -= hi * c_R;
  }
  A.setFromTriplets(T.begin(), T.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  const Vec c = lu.solve(b);
  std::vector<double> out(N + 1);
  out[0] = c_rho;
  out[N] = c_R;
  for (int i = 1; i < N; ++i) out[i] = c(i - 1);
  return out;
}

Mat gram_schmidt_oracle(const Mat &M) {
  Eigen::HouseholderQR<Mat> qr(M);
  Mat Q = qr.householderQ() * Mat::Identity(M.rows(), M.cols());
  const Mat R = qr.matrixQR().topRows(M.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < M.cols(); ++j)
    if (R(j, j) < 0) Q.col(j) *= -1;
  return Q;
}

CheckResult make(int id, const char *name) {
  CheckResult r;
  r.id = id;
  r.name = name;
  return r;
}

const AmbientConfig kCfg42(4, 2);
const AmbientConfig kCfg52(5, 2);

CheckResult classification(const SuiteOptions &o) {
  CheckResult r = make(1, "classification fidelity");
  r.metric = "max |cylindrical residual|";
  r.comparison = "<";
  r.tolerance = 1e-8;
  r.budget = 30;
  double worst = 0;
  int count = 0;
  for (const AmbientConfig &cfg : {kCfg42, kCfg52}) {
    for (const std::string &name : gallery_names()) {
      if (name == "mixed-parity" && cfg.n != kCfg42.n) continue;  // fixed ambient, checked once
      HomogeneousSolution u(cfg, 1.0);
      try {
        u = gallery(name, cfg);
      } catch (const std::invalid_argument &) {
        r.details.push_back(name + " has no instance at " + cfg_name(cfg));
        continue;
      }
      const double res = max_residual(u, u.config(), 1000, o.seed);
      worst = std::max(worst, res);
      ++count;
      r.details.push_back(name + " at " + cfg_name(u.config()) + ": " + fmt("%.2e", res));
    }
    double wr = 0;
    for (int k = 0; k < 50; ++k) {
      const HomogeneousSolution u = random_solution(cfg, 6.0, o.seed * 1000 + k);
      wr = std::max(wr, max_residual(u, cfg, 1000, o.seed + k));
      ++count;
    }
    worst = std::max(worst, wr);
    r.details.push_back("50 random modes at " + cfg_name(cfg) + ": " + fmt("%.2e", wr));
  }
  r.details.push_back(std::to_string(count) + " solutions x 1000 points");
  r.measured = worst;
  r.pass = worst < r.tolerance;
  return r;
}

CheckResult rigidity(const SuiteOptions &) {
  CheckResult r = make(2, "frequency rigidity");
  r.metric = "max |N(r) - Lambda|, r in [0.1, 1]";
  r.comparison = "<";
  r.tolerance = 1e-3;
  r.budget = 60;
  const auto radii = geometric_radii(0.1, 1.0, std::pow(10.0, 0.25));
  std::vector<std::pair<std::string, HomogeneousSolution>> sols;
  for (const AmbientConfig &cfg : {kCfg42, kCfg52}) {
    sols.emplace_back("distance " + cfg_name(cfg), distance_solution(cfg));
    sols.emplace_back("mode j=1 " + cfg_name(cfg), pure_mode(cfg, 1));
    for (const std::string name : {"codim1-lift", "nonintegral", "large-singular"}) {
      try {
        sols.emplace_back(name + " " + cfg_name(cfg), gallery(name, cfg));
      } catch (const std::invalid_argument &) {
      }
    }
  }
  sols.emplace_back("mode j=2 " + cfg_name(kCfg42), pure_mode(kCfg42, 2));
  double worst = 0;
  for (const auto &[label, u] : sols) {
    FrequencyOptions fo;
    fo.route = u.config().n == 4 ? EnergyRoute::Bulk : EnergyRoute::Flux;
    const FrequencyProfile P = frequency_profile(u, Vec::Zero(u.config().n), radii, u.config(), fo);
    double w = 0;
    for (double N : P.N) w = std::max(w, std::abs(N - u.Lambda()));
    worst = std::max(worst, w);
    r.details.push_back(label + ": " + fmt("%.2e", w));
  }
  r.details.push_back("bulk route at n=4, flux route at n=5");
  r.details.push_back("mixed-parity (n=11) is outside the quadrature range and is checked pointwise only");
  r.measured = worst;
  r.pass = worst < r.tolerance;
  return r;
}

CheckResult monotonicity(const SuiteOptions &o) {
  CheckResult r = make(3, "monotonicity and growth");
  r.metric = "max relative growth error |d/dr log(r^-d H) / (2N/r) - 1|";
  r.comparison = "<";
  r.tolerance = 1e-2;
  r.budget = 60;
  FrequencyOptions flux;
  flux.route = EnergyRoute::Flux;
  const auto radii = geometric_radii(0.05, 1.0);
  double worst_drop = 0, worst_growth = 0;
  for (int s = 0; s < 20; ++s) {
    const SolutionMix u = random_mix(kCfg42, 5.0, 3, o.seed * 100 + s);
    const FrequencyProfile P = frequency_profile(u, Vec::Zero(4), radii, kCfg42, flux);
    for (size_t i = 0; i + 1 < radii.size(); ++i) worst_drop = std::max(worst_drop, P.N[i] - P.N[i + 1]);
    // N on the bulk route against a difference quotient of H alone, one radius per mix
    const double rr = std::array{0.1, 0.4, 0.9}[s % 3];
    const FrequencyProfile B = frequency_profile(u, Vec::Zero(4), {rr}, kCfg42);
    const double h = 1e-3, a = rr * (1 - h), b = rr * (1 + h);
    const auto H = height_profile(u, Vec::Zero(4), {a, b}, kCfg42);
    const double dlog = (std::log(H[1] * std::pow(b, -2)) - std::log(H[0] * std::pow(a, -2))) / (b - a);
    worst_growth = std::max(worst_growth, std::abs(dlog / (2 * B.N[0] / rr) - 1));
  }
  r.details.push_back("max decrease of N over 20 mixes: " + fmt("%.2e", worst_drop) + " (tolerance 1e-6)");
  r.details.push_back("growth identity with bulk-route N, r cycling through 0.1, 0.4, 0.9");
  r.measured = worst_growth;
  r.pass = worst_growth < r.tolerance && worst_drop <= 1e-6;
  return r;
}

CheckResult spectral(const SuiteOptions &o) {
  CheckResult r = make(4, "spectral oracle equivalence");
  r.metric = "max relative error quadrature N vs closed form";
  r.comparison = "<";
  r.tolerance = 1e-3;
  const auto blocks = spectral_basis(kCfg42, 5.0);
  const std::vector<double> rs = {0.05, 0.1, 0.2, 0.5, 1.0};
  FrequencyOptions flux;
  flux.route = EnergyRoute::Flux;
  double worst = 0;
  for (int s = 0; s < 20; ++s) {
    const SolutionMix u = random_mix(kCfg42, 5.0, 3, o.seed * 100 + s);
    const auto W = spectral_decompose(u, 1.0, blocks, kCfg42).unit_weights();
    const FrequencyProfile P = frequency_profile(u, Vec::Zero(4), rs, kCfg42, flux);
    for (size_t i = 0; i < rs.size(); ++i) {
      const double cf = closed_form_frequency(W, rs[i]);
      worst = std::max(worst, std::abs(P.N[i] - cf) / cf);
    }
  }
  r.details.push_back("20 mixes, flux route, r in {0.05, 0.1, 0.2, 0.5, 1}: " + fmt("%.2e", worst));

  // annulus: the (8/7, -1/7) case exactly
  const auto [a, b] = annulus_coefficients(1.0, 2, 0.5, 1.0, 0.0, 1.0);
  const double exact_err = std::max(std::abs(a - 8.0 / 7.0), std::abs(b + 1.0 / 7.0));
  r.details.push_back("annulus (8/7, -1/7) case error " + fmt("%.1e", exact_err));
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> U(0, 1);
  double lin = 0;
  for (int i = 0; i < 20; ++i) {
    const double L = 1 + 5 * U(rng), rho = 0.1 + 0.5 * U(rng), R = rho + 0.2 + U(rng);
    const int d = 1 + static_cast<int>(3 * U(rng));
    const double cr = 2 * U(rng) - 1, cR = 2 * U(rng) - 1;
    const auto [x, y] = annulus_coefficients(L, d, rho, R, cr, cR);
    Eigen::Matrix2d A;
    A << std::pow(R, L), std::pow(R, -L - d + 1), std::pow(rho, L), std::pow(rho, -L - d + 1);
    const Eigen::Vector2d z = A.fullPivLu().solve(Eigen::Vector2d(cR, cr));
    lin = std::max({lin, std::abs(x - z(0)) / (1 + std::abs(z(0))), std::abs(y - z(1)) / (1 + std::abs(z(1)))});
  }
  r.details.push_back("annulus 20 random cases vs direct 2x2 solve: " + fmt("%.1e", lin));

  const double golden = (1 + std::sqrt(5.0)) / 2;
  const auto u1 = distance_solution(kCfg42);
  const auto u2 = pure_mode(kCfg42, 1);
  auto fR = [&](const Vec &X) { return u1.value(X) + 0.5 * u2.value(X); };
  const AnnulusSolution S = solve_annulus([](const Vec &) { return 0.0; }, fR, 0.5, 1.0, kCfg42, 3.0);
  const int N = 4000;
  const auto c1 = radial_fd(1.0, 2, 0.5, 1.0, 0.0, 1.0, N);
  const auto c2 = radial_fd(golden, 2, 0.5, 1.0, 0.0, 0.5, N);
  double fd = 0;
  for (int k = 0; k < 8; ++k) {
    Vec th(4);
    th << std::cos(k), std::sin(2 * k), 0.4 + 0.1 * k, std::cos(3 * k);
    th.normalize();
    for (int i : {N / 4, N / 2, 3 * N / 4}) {
      const double rr = 0.5 + 0.5 * i / N;
      const double expect = c1[i] * u1.value(th) + c2[i] * u2.value(th);
      fd = std::max(fd, std::abs(S.value(rr * th) - expect) / std::max(1e-3, std::abs(expect)));
    }
  }
  r.details.push_back("annulus vs radial finite differences: " + fmt("%.1e", fd) + " (tolerance 1e-4)");
  r.measured = worst;
  r.pass = worst < r.tolerance && exact_err < 1e-14 && lin < 1e-10 && fd < 1e-4 && S.warnings.empty();
  return r;
}

CheckResult orthogonality(const SuiteOptions &) {
  CheckResult r = make(5, "orthogonality and density");
  r.metric = "max cross-Lambda Gram entry";
  r.comparison = "<";
  r.tolerance = 1e-8;
  const auto blocks = spectral_basis(kCfg42, 4.0);
  QuadratureOptions q;
  q.theta_nodes = 80;
  q.s1_nodes = 48;
  const QuadratureRule rule = SplitSphereRule(kCfg42, q).scaled(Vec::Zero(4), 1.0);
  std::vector<Vec> vals;
  std::vector<int> owner;
  for (size_t k = 0; k < blocks.size(); ++k)
    for (const auto &f : blocks[k].basis) {
      Vec v(rule.size());
      for (int i = 0; i < rule.size(); ++i) v(i) = f.value(rule.nodes.col(i));
      vals.push_back(v);
      owner.push_back(static_cast<int>(k));
    }
  double cross = 0;
  for (size_t a = 0; a < vals.size(); ++a)
    for (size_t b = a + 1; b < vals.size(); ++b)
      if (owner[a] != owner[b]) cross = std::max(cross, std::abs(vals[a].cwiseProduct(rule.weights).dot(vals[b])));
  r.details.push_back(std::to_string(vals.size()) + " basis functions in " + std::to_string(blocks.size()) +
                      " blocks, independent denser rule");
  double parseval = 0;
  for (const std::string name : {"codim1-lift", "nonintegral", "large-singular"}) {
    const auto S = spectral_decompose(gallery(name, kCfg42), 0.8, 5.0, kCfg42);
    const double def = std::abs(1 - S.parseval_lhs / S.parseval_rhs);
    parseval = std::max(parseval, def);
    r.details.push_back("Parseval deficit " + name + ": " + fmt("%.1e", def) + " (< 1e-6)");
  }
  r.measured = cross;
  r.pass = cross < r.tolerance && parseval < 1e-6;
  return r;
}

CheckResult minkowski(const SuiteOptions &o) {
  CheckResult r = make(6, "Minkowski scaling");
  r.metric = "|log-log slope - 2|, s = 2^-3 .. 2^-7";
  r.comparison = "<=";
  r.tolerance = 0.2;
  r.budget = 120;
  const auto u = gallery("large-singular", kCfg42);
  const double pitch = std::ldexp(1.0, -8);
  const SingularSample S = sample_singular_set(u, Vec::Zero(4), 1.125, pitch, kCfg42);
  std::vector<double> s;
  for (int k = 3; k <= 7; ++k) s.push_back(std::ldexp(1.0, -k));
  MinkowskiOptions mo;
  mo.seed = o.seed + 6;
  const MinkowskiEstimate e = minkowski_content(S.all_points(), S.pitch, s, Vec::Zero(4), 1.0, kCfg42, mo);
  r.details.push_back(std::to_string(S.points.size()) + " off-boundary and " + std::to_string(S.boundary_points.size()) +
                      " boundary points at pitch 2^-8");
  r.details.push_back("slope " + fmt("%.4f", e.slope));
  r.measured = std::abs(e.slope - 2.0);
  r.pass = !e.empty && r.measured <= r.tolerance;
  return r;
}

CheckResult cone_geometry(const SuiteOptions &o) {
  CheckResult r = make(7, "cone geometry");
  r.metric = "avoiding 2-plane margin";
  r.comparison = ">=";
  r.tolerance = 0.3;
  r.budget = 60;
  const auto u = gallery("large-singular", kCfg42);
  const SingularSample S = sample_singular_set(u, Vec::Zero(4), 1.0, 1.0 / 16, kCfg42);
  const auto F = sphere_trace(S.all_points(), Vec::Zero(4), 0.25);
  PlaneSearchOptions po;
  po.seed = o.seed + 11;
  const AvoidingPlane P = find_avoiding_2plane(F, 0.3, po);
  ConeOptions co;
  co.seed = o.seed + 13;
  const ConeFit C = cone_fit(S.points, Vec::Zero(2), kCfg42, co);
  double tplane = 1;
  for (int i = 2; i < 4; ++i) tplane = std::min(tplane, (C.V.transpose() * Vec::Unit(4, i)).norm());
  r.details.push_back(std::to_string(F.size()) + " trace points, search " + (P.success ? "succeeded" : "failed"));
  r.details.push_back("cone aperture " + fmt("%.4f", C.alpha) + " (< 1)");
  r.details.push_back("min |V^T e_t| over the t axes " + fmt("%.4f", tplane) + " (> 0.95)");
  r.measured = P.margin;
  r.pass = P.success && P.margin >= r.tolerance && C.alpha < 1.0 && tplane > 0.95;
  return r;
}

CheckResult frequency_one(const SuiteOptions &) {
  CheckResult r = make(8, "frequency-1 exclusion");
  r.metric = "off-boundary singular points in B_0.2";
  r.comparison = "<=";
  r.tolerance = 0;
  SolutionMix u(kCfg42);
  u.add(distance_solution(kCfg42), 1.0);
  u.add(pure_mode(kCfg42, 1), 0.1);
  const FrequencyProfile P = frequency_profile(u, Vec::Zero(4), {1.0}, kCfg42);
  const SingularSample S = sample_singular_set(u, Vec::Zero(4), 0.2, 0.2 / 16, kCfg42);
  r.details.push_back("N(0, 1) = " + fmt("%.6f", P.N[0]) + " (<= 1.01)");
  r.measured = static_cast<double>(S.points.size());
  r.pass = P.N[0] <= 1.01 && S.points.empty();
  return r;
}

CheckResult flattening(const SuiteOptions &o) {
  CheckResult r = make(9, "flattening correctness");
  r.metric = "max error of rho and conjugated matrix vs closed form (flat, linear)";
  r.comparison = "<";
  r.tolerance = 1e-10;
  r.budget = 120;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> U(-0.1, 0.1);
  auto rand_X = [&] {
    Vec X(4);
    for (int i = 0; i < 4; ++i) X(i) = U(rng);
    return X;
  };
  double worst = 0;
  for (double beta : {1.5, 2.0, 3.0}) {
    FlatteningOptions fo;
    fo.beta = beta;
    const FlatteningMap map = build_flattening(GraphDomain::flat(kCfg42), fo);
    const double c = c_beta(2, beta), h0 = std::pow(c, 1 / beta);
    Mat want = Mat::Zero(4, 4);
    want.diagonal() << 1, 1, std::pow(c, -2 / beta), std::pow(c, -2 / beta);
    want *= std::pow(c, 2 / beta);
    for (int k = 0; k < 10; ++k) {
      const Vec X = rand_X();
      Vec rho = X;
      rho.tail(2) *= h0;
      worst = std::max({worst, (map.rho(X) - rho).norm(), (conjugated_matrix(map, X) - want).norm()});
    }
  }
  Mat L(2, 2);
  L << 0.02, -0.015, 0.01, 0.03;
  {
    const FlatteningMap map = build_flattening(GraphDomain::linear(kCfg42, L));
    const double h0 = std::sqrt(c_beta(2, 2.0));
    Mat Vh(4, 2), Wh(4, 2);
    Vh << Mat::Identity(2, 2), L;
    Wh << -L.transpose(), Mat::Identity(2, 2);
    const Mat W = gram_schmidt_oracle(Wh);
    Mat Jac(4, 4);
    Jac << Vh, h0 * W;
    const Mat Jinv = Jac.inverse();
    const Mat want = std::abs(Jac.determinant()) * Jinv * Jinv.transpose();
    for (int k = 0; k < 10; ++k) {
      const Vec X = rand_X();
      Vec rho(4);
      rho << X.head(2), L * X.head(2);
      rho += h0 * W * X.tail(2);
      worst = std::max({worst, (map.rho(X) - rho).norm(), (conjugated_matrix(map, X) - want).norm()});
    }
  }
  r.details.push_back("flat (beta = 1.5, 2, 3) and linear graphs, 10 points each: " + fmt("%.2e", worst));

  const FlatteningMap para = build_flattening(GraphDomain::paraboloid(kCfg42, 0.05, 0.4));
  const MatrixField A = [&](const Vec &X) { return conjugated_matrix(para, X); };
  C01Options co;
  co.points_per_shell = 8;
  co.seed = o.seed + 19;
  const C01Report good = check_C01(A, kCfg42, co);
  r.details.push_back("paraboloid eps = 0.05, beta = 2: verdict " + std::string(good.pass ? "pass" : "fail") + ", slope " +
                      fmt("%.3f", good.slope) + ", C = " + fmt("%.4f", good.C) + ", shell variation x" +
                      fmt("%.3f", good.C_variation) + " (<= 2)");
  const Mat E = Mat::Identity(4, 4);
  const C01Report bad = check_C01([&](const Vec &X) { return Mat(A(X) + std::sqrt(X.tail(2).norm()) * E); }, kCfg42, co);
  r.details.push_back("|t|^{1/2} defect: verdict " + std::string(bad.pass ? "pass" : "fail") + ", slope " +
                      fmt("%.3f", bad.slope) + " (0.5 +- 0.1)");
  r.measured = worst;
  r.pass = worst < r.tolerance && good.pass && good.C_variation <= 2.0 && !bad.pass && std::abs(bad.slope - 0.5) <= 0.1;
  return r;
}

CheckResult regularized_distance(const SuiteOptions &o) {
  CheckResult r = make(10, "c_beta and D_beta");
  r.metric = "max relative error of c_beta quadrature vs closed form";
  r.comparison = "<";
  r.tolerance = 1e-6;
  double worst_c = 0;
  for (int d = 1; d <= 3; ++d)
    for (double beta : {1.5, 2.0, 3.0}) {
      const double c = c_beta(d, beta);
      worst_c = std::max(worst_c, std::abs(c_beta_quadrature(d, beta) - c) / c);
    }
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> U(-1, 1);
  double worst_d = 0;
  for (const AmbientConfig &cfg : {AmbientConfig(4, 2), AmbientConfig(3, 1), AmbientConfig(5, 3)}) {
    const GraphDomain G = GraphDomain::flat(cfg);
    for (double beta : {1.5, 2.0, 3.0})
      for (int k = 0; k < 5; ++k) {
        Vec X(cfg.n);
        for (int i = 0; i < cfg.n; ++i) X(i) = U(rng);
        const double want = std::pow(c_beta(cfg.d, beta), -1 / beta) * X.tail(cfg.m()).norm();
        worst_d = std::max(worst_d, std::abs(D_beta(X, G, beta) - want) / want);
      }
  }
  r.details.push_back("flat-graph D_beta relative error " + fmt("%.2e", worst_d) + " (< 1e-8)");
  r.measured = worst_c;
  r.pass = worst_c < r.tolerance && worst_d < 1e-8;
  return r;
}

}  // namespace

CheckResult run_criterion(int id, const SuiteOptions &opts) {
  static const std::function<CheckResult(const SuiteOptions &)> table[kCriteria] = {
      classification, rigidity, monotonicity, spectral, orthogonality,
      minkowski, cone_geometry, frequency_one, flattening, regularized_distance};
  if (id < 1 || id > kCriteria) throw std::invalid_argument("no criterion " + std::to_string(id));
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = table[id - 1](opts);
  } catch (const std::exception &e) {
    r.id = id;
    r.name = "criterion " + std::to_string(id);
    r.pass = false;
    r.details.push_back(std::string("error: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget > 0 && r.seconds > r.budget) {
    r.pass = false;
    r.details.push_back("runtime " + fmt("%.1f", r.seconds) + " s exceeds the budget");
  }
  return r;
}

std::vector<CheckResult> run_suite(const std::vector<int> &ids, const SuiteOptions &opts) {
  std::vector<CheckResult> out;
  for (int id : ids) out.push_back(run_criterion(id, opts));
  return out;
}

std::string summary_line(const CheckResult &r) {
  std::ostringstream os;
  os << "criterion " << r.id << " " << (r.pass ? "PASS" : "FAIL") << " " << r.name << ": " << r.metric << " = "
     << fmt("%.4g", r.measured) << " (" << r.comparison << " " << fmt("%.4g", r.tolerance) << ") [" << fmt("%.1f", r.seconds)
     << " s";
  if (r.budget > 0) os << " / " << fmt("%.0f", r.budget) << " s";
  os << "]";
  return os.str();
}

nlohmann::json to_json(const CheckResult &r) {
  return {{"id", r.id},           {"name", r.name},
          {"pass", r.pass},       {"metric", r.metric},
          {"measured", r.measured}, {"comparison", r.comparison},
          {"tolerance", r.tolerance}, {"budget_seconds", r.budget},
          {"details", r.details}};
}

}  // namespace cofreq::suite
