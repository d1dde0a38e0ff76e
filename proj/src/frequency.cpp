#include "cofreq/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/random/sobol.hpp>
#include <boost/random/uniform_01.hpp>
#include <tbb/parallel_for.h>

namespace cofreq {

namespace {

bool on_plane(const Vec &c, const AmbientConfig &cfg) { return c.tail(cfg.m()).norm() == 0.0; }

Mat sym_sqrt(const Mat &A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  if (es.eigenvalues().minCoeff() <= 0) throw std::invalid_argument("frozen matrix A0 is not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// Boundary rules for the family dE_s, s > 0. On the split chart the rule is a rescaling of s = 1.
class ShellFamily {
 public:
  ShellFamily(const AmbientConfig &cfg, const Vec &center, const Mat &M, const QuadratureOptions &q)
      : cfg_(cfg), center_(center), M_(M), q_(q) {
    const Ellipsoid unit(center, M, 1.0);
    scalable_ = on_plane(center, cfg) && unit.preserves_split(cfg.d);
    if (scalable_) unit_ = boundary_rule(unit, cfg, q);
  }

  bool split() const { return scalable_; }

  QuadratureRule at(double s) const {
    if (!scalable_) return boundary_rule(Ellipsoid(center_, M_, s), cfg_, q_);
    QuadratureRule r = unit_;
    r.nodes = (s * (unit_.nodes.colwise() - center_)).colwise() + center_;
    r.weights *= std::pow(s, cfg_.d);
    return r;
  }

 private:
  AmbientConfig cfg_;
  Vec center_;
  Mat M_;
  QuadratureOptions q_;
  bool scalable_ = false;
  QuadratureRule unit_;
};

// Radial Gauss-Legendre nodes covering [0, radii.back()] with panel breaks at every radius,
// plus dyadic panels below the first. Each node records the first radius index it counts toward.
struct RadialNodes {
  std::vector<double> s, w;
  std::vector<int> slot;
};

RadialNodes radial_nodes(const std::vector<double> &radii, int per_panel, int inner) {
  std::vector<double> breaks;
  const double r0 = radii.front();
  breaks.push_back(0.0);
  for (int k = inner; k >= 1; --k) breaks.push_back(r0 * std::ldexp(1.0, -k));
  for (double r : radii) breaks.push_back(r);
  RadialNodes out;
  int slot = 0;
  for (size_t p = 1; p < breaks.size(); ++p) {
    if (breaks[p] <= breaks[p - 1]) continue;
    Vec x, wx;
    gauss_legendre(per_panel, breaks[p - 1], breaks[p], x, wx);
    while (slot < static_cast<int>(radii.size()) && radii[slot] < breaks[p]) ++slot;
    for (int i = 0; i < x.size(); ++i) {
      out.s.push_back(x(i));
      out.w.push_back(wx(i));
      out.slot.push_back(slot);
    }
  }
  return out;
}

// Cumulative int_0^{r_i} shell(s) ds for every radius.
std::vector<double> cumulative_radial(const std::vector<double> &radii, int per_panel, int inner,
                                      const std::function<double(double)> &shell) {
  const RadialNodes rn = radial_nodes(radii, per_panel, inner);
  std::vector<double> vals(rn.s.size());
  tbb::parallel_for(size_t(0), rn.s.size(), [&](size_t i) { vals[i] = rn.w[i] * shell(rn.s[i]); });
  std::vector<double> out(radii.size(), 0.0);
  std::vector<double> by_slot(radii.size(), 0.0);
  for (size_t i = 0; i < vals.size(); ++i) by_slot[rn.slot[i]] += vals[i];
  double acc = 0.0;
  for (size_t k = 0; k < radii.size(); ++k) {
    acc += by_slot[k];
    out[k] = acc;
  }
  return out;
}

void check_radii(const std::vector<double> &radii) {
  if (radii.empty()) throw std::invalid_argument("no radii given");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0)) throw std::invalid_argument("radii must be positive");
    if (i && radii[i] <= radii[i - 1]) throw std::invalid_argument("radii must be strictly increasing");
  }
}

QuadratureOptions spectral_quad(const QuadratureOptions &base, double Lambda_max) {
  QuadratureOptions q = base;
  const int deg = static_cast<int>(std::ceil(2 * Lambda_max)) + 2;
  q.s1_nodes = std::max(q.s1_nodes, 2 * deg + 2);
  q.s2_lat = std::max(q.s2_lat, deg / 2 + 2);
  q.s3_lat = std::max(q.s3_lat, deg / 2 + 2);
  q.theta_nodes = std::max(q.theta_nodes, deg + 16);
  return q;
}

}  // namespace

QuadratureOptions FrequencyOptions::default_quad() {
  QuadratureOptions q;
  q.theta_nodes = 32;
  q.s1_nodes = 32;
  q.s2_lat = 10;
  q.s3_lat = 8;
  return q;
}

std::vector<double> geometric_radii(double r_min, double r_max, double ratio) {
  if (!(r_min > 0) || !(r_max >= r_min) || !(ratio > 1)) throw std::invalid_argument("bad radius range");
  std::vector<double> out;
  for (double r = r_max; r >= r_min * (1 - 1e-12); r /= ratio) out.push_back(r);
  if (out.back() > r_min * (1 + 1e-12)) out.push_back(r_min);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<double> height_profile(const Field &u, const Vec &center, const std::vector<double> &radii,
                                   const AmbientConfig &cfg, const QuadratureOptions &quad) {
  check_radii(radii);
  if (center.size() != cfg.n) throw std::invalid_argument("center has wrong dimension");
  const ShellFamily fam(cfg, center, Mat::Identity(cfg.n, cfg.n), quad);
  auto u2 = [&](const Vec &Y) {
    const double v = u.value(Y);
    return v * v;
  };
  std::vector<double> H(radii.size());
  for (size_t i = 0; i < radii.size(); ++i) H[i] = apply_rule(fam.at(radii[i]), u2);
  return H;
}

FrequencyProfile frequency_profile(const Field &u, const Vec &center, const std::vector<double> &radii,
                                   const AmbientConfig &cfg, const FrequencyOptions &opts, const Coefficients *coef) {
  check_radii(radii);
  if (center.size() != cfg.n) throw std::invalid_argument("center has wrong dimension");
  const int n = cfg.n;
  Mat A0 = Mat::Identity(n, n);
  if (coef) A0 = coef->A0 ? *coef->A0 : coef->calA(center);
  const Mat M = coef ? sym_sqrt(A0) : Mat::Identity(n, n);
  const Mat Minv = M.inverse();
  auto calA = [&](const Vec &Y) -> Mat { return coef ? coef->calA(Y) : Mat::Identity(n, n); };

  FrequencyProfile P;
  P.center = center;
  P.radii = radii;
  P.matrix_root = M;
  const ShellFamily fam(cfg, center, M, opts.quad);
  P.route = opts.route;
  if (P.route == EnergyRoute::Auto) P.route = fam.split() ? EnergyRoute::Bulk : EnergyRoute::Flux;

  // H(r) = int mu u^2 (r / |A0^{-1}(Y - Y0)|) d sigma; the rule carries w and the geometric factor.
  auto mu_u2 = [&](const Vec &Y) {
    const Vec z = Minv * (Y - center);
    const Vec q = Minv * z;
    const double v = u.value(Y);
    return q.dot(calA(Y) * q) / z.squaredNorm() * v * v;
  };
  P.H.resize(radii.size());
  tbb::parallel_for(size_t(0), radii.size(), [&](size_t i) { P.H[i] = apply_rule(fam.at(radii[i]), mu_u2); });

  if (P.route == EnergyRoute::Bulk) {
    auto energy = [&](const Vec &Y) {
      double v;
      Vec g;
      u.value_gradient(Y, v, g);
      return g.dot(calA(Y) * g);
    };
    P.D = cumulative_radial(radii, opts.panel_nodes, opts.inner_panels,
                            [&](double s) { return apply_rule(fam.at(s), energy); });
  } else {
    P.D.resize(radii.size());
    tbb::parallel_for(size_t(0), radii.size(), [&](size_t i) {
      auto flux = [&](const Vec &Y) {
        double v;
        Vec g;
        u.value_gradient(Y, v, g);
        const Vec z = Minv * (Y - center);
        return v * (calA(Y) * g).dot(Minv * z) / z.norm();
      };
      P.D[i] = apply_rule(fam.at(radii[i]), flux);
    });
  }

  P.N.resize(radii.size());
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!(std::abs(P.H[i]) > opts.h_floor)) {
      std::ostringstream os;
      os << "degenerate solution: H(" << radii[i] << ") = " << P.H[i];
      throw std::runtime_error(os.str());
    }
    P.N[i] = radii[i] * P.D[i] / P.H[i];
  }
  return P;
}

double doubling_index(const Field &u, const Vec &X0, double r, const AmbientConfig &cfg,
                      const FrequencyOptions &opts) {
  if (!(r > 0)) throw std::invalid_argument("radius must be positive");
  const ShellFamily fam(cfg, X0, Mat::Identity(cfg.n, cfg.n), opts.quad);
  auto u2 = [&](const Vec &Y) {
    const double v = u.value(Y);
    return v * v;
  };
  const std::vector<double> radii = {r, 2 * r, 4 * r, 8 * r};
  const auto I = cumulative_radial(radii, opts.panel_nodes, opts.inner_panels,
                                   [&](double s) { return apply_rule(fam.at(s), u2); });
  if (!(I[0] > 1e-300)) throw std::runtime_error("doubling index: integral over B_r underflows");
  return I[3] / I[0];
}

double closed_form_frequency(const std::map<double, double> &weights, double r) {
  double num = 0, den = 0;
  for (const auto &[L, W] : weights) {
    if (W < 0) throw std::invalid_argument("spectral weights must be nonnegative");
    const double t = W * std::pow(r, 2 * L);
    num += L * t;
    den += t;
  }
  if (!(den > 0)) throw std::invalid_argument("spectral weights are all zero");
  return num / den;
}

std::vector<SpectralBlock> spectral_basis(const AmbientConfig &cfg, double Lambda_max, const QuadratureOptions &quad) {
  const FrequencySet F = frequency_set(cfg, Lambda_max);
  const QuadratureRule rule = SplitSphereRule(cfg, spectral_quad(quad, Lambda_max)).scaled(Vec::Zero(cfg.n), 1.0);
  const Vec &w = rule.weights;
  std::vector<SpectralBlock> out;
  for (const auto &entry : F.entries) {
    SpectralBlock b;
    b.Lambda = entry.Lambda;
    b.modes = homogeneous_space_modes(cfg, entry);
    const int K = static_cast<int>(b.modes.size());
    Mat V(rule.size(), K);
    for (int l = 0; l < K; ++l) {
      const TermField f = b.modes[l].field(cfg.d);
      for (int i = 0; i < rule.size(); ++i) V(i, l) = f.value(rule.nodes.col(i));
    }
    const Mat G = V.transpose() * w.asDiagonal() * V;
    Eigen::LLT<Mat> llt(G);
    if (llt.info() != Eigen::Success) throw std::runtime_error("mode traces are linearly dependent");
    // basis = V L^{-T}
    b.combo = llt.matrixU().solve(Mat::Identity(K, K));
    for (int i = 0; i < K; ++i) {
      TermField f(cfg.d, cfg.m());
      for (int l = 0; l < K; ++l)
        if (b.combo(l, i) != 0.0) f.add(b.modes[l].field(cfg.d), b.combo(l, i));
      b.basis.push_back(std::move(f));
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::map<double, double> SpectralDecomposition::unit_weights() const {
  std::map<double, double> W;
  for (size_t k = 0; k < Lambdas.size(); ++k) {
    double s = 0;
    for (double a : coeffs[k]) s += a * a;
    W[Lambdas[k]] = s * std::pow(r0, -2 * Lambdas[k]);
  }
  return W;
}

SpectralDecomposition spectral_decompose(const Field &u, double r0, const std::vector<SpectralBlock> &blocks,
                                         const AmbientConfig &cfg, const QuadratureOptions &quad) {
  if (!(r0 > 0)) throw std::invalid_argument("reference radius must be positive");
  double Lmax = 1.0;
  for (const auto &b : blocks) Lmax = std::max(Lmax, b.Lambda);
  const QuadratureRule rule = SplitSphereRule(cfg, spectral_quad(quad, Lmax)).scaled(Vec::Zero(cfg.n), 1.0);
  Vec f(rule.size());
  for (int i = 0; i < rule.size(); ++i) f(i) = u.value(r0 * rule.nodes.col(i));
  const Vec wf = rule.weights.cwiseProduct(f);

  SpectralDecomposition S;
  S.r0 = r0;
  S.parseval_rhs = wf.dot(f);
  for (const auto &b : blocks) {
    std::vector<double> a(b.size());
    tbb::parallel_for(0, b.size(), [&](int i) {
      double acc = 0;
      for (int q = 0; q < rule.size(); ++q) acc += wf(q) * b.basis[i].value(rule.nodes.col(q));
      a[i] = acc;
    });
    for (double c : a) S.parseval_lhs += c * c;
    S.Lambdas.push_back(b.Lambda);
    S.coeffs.push_back(std::move(a));
  }
  if (S.parseval_lhs < 0.9 * S.parseval_rhs) {
    std::ostringstream os;
    os << "Parseval deficit " << 1 - S.parseval_lhs / S.parseval_rhs << " exceeds 10%; Lambda_max " << Lmax
       << " truncates too much";
    S.warnings.push_back(os.str());
  }
  return S;
}

SpectralDecomposition spectral_decompose(const Field &u, double r0, double Lambda_max, const AmbientConfig &cfg) {
  return spectral_decompose(u, r0, spectral_basis(cfg, Lambda_max), cfg);
}

std::pair<double, double> annulus_coefficients(double Lambda, int d, double rho, double R, double c_rho,
                                               double c_R) {
  if (!(0 < rho && rho < R)) throw std::invalid_argument("annulus needs 0 < rho < R");
  const double q = rho / R;
  const double a = (c_R - std::pow(q, Lambda + d - 1) * c_rho) / (std::pow(R, Lambda) - std::pow(q, Lambda + d - 1) * std::pow(rho, Lambda));
  const double b = (c_rho - std::pow(q, Lambda) * c_R) /
                   (std::pow(rho, -Lambda - d + 1) - std::pow(q, Lambda) * std::pow(R, -Lambda - d + 1));
  return {a, b};
}

double AnnulusSolution::value(const Vec &X) const {
  const double r = X.norm();
  if (!(r > 0)) throw std::invalid_argument("annulus solution evaluated at the origin");
  const Vec th = X / r;
  double acc = 0;
  for (size_t k = 0; k < blocks.size(); ++k) {
    const double L = blocks[k].Lambda;
    const double up = std::pow(r, L), down = std::pow(r, -L - d + 1);
    for (int i = 0; i < blocks[k].size(); ++i) {
      const auto [a, b] = ab[k][i];
      if (a == 0.0 && b == 0.0) continue;
      acc += (a * up + b * down) * blocks[k].basis[i].value(th);
    }
  }
  return acc;
}

AnnulusSolution solve_annulus(const ScalarField &f_rho, const ScalarField &f_R, double rho, double R,
                              const AmbientConfig &cfg, double Lambda_max, const QuadratureOptions &quad) {
  if (!(0 < rho && rho < R)) throw std::invalid_argument("annulus needs 0 < rho < R");
  AnnulusSolution S;
  S.rho = rho;
  S.R = R;
  S.d = cfg.d;
  S.blocks = spectral_basis(cfg, Lambda_max, quad);
  const QuadratureRule rule = SplitSphereRule(cfg, spectral_quad(quad, Lambda_max)).scaled(Vec::Zero(cfg.n), 1.0);
  Vec g_rho(rule.size()), g_R(rule.size());
  for (int i = 0; i < rule.size(); ++i) {
    g_rho(i) = rule.weights(i) * f_rho(rho * rule.nodes.col(i));
    g_R(i) = rule.weights(i) * f_R(R * rule.nodes.col(i));
  }
  bool warned = false;
  for (const auto &b : S.blocks) {
    std::vector<std::pair<double, double>> ab(b.size());
    const double cond = 1 - std::pow(rho / R, 2 * b.Lambda + cfg.d - 1);
    if (cond < 1e-8 && !warned) {
      S.warnings.push_back("annulus 2x2 system is near singular (rho/R close to 1)");
      warned = true;
    }
    for (int i = 0; i < b.size(); ++i) {
      double c_rho = 0, c_R = 0;
      for (int q = 0; q < rule.size(); ++q) {
        const double phi = b.basis[i].value(rule.nodes.col(q));
        c_rho += g_rho(q) * phi;
        c_R += g_R(q) * phi;
      }
      ab[i] = annulus_coefficients(b.Lambda, cfg.d, rho, R, c_rho, c_R);
    }
    S.ab.push_back(std::move(ab));
  }
  return S;
}

PinchReport pinch_detect(const FrequencyProfile &profile, double Lambda, double eps, double r1, double r2) {
  if (!(r1 <= r2)) throw std::invalid_argument("pinch interval must have r1 <= r2");
  const auto &R = profile.radii;
  if (R.empty() || r1 < R.front() * (1 - 1e-9) || r2 > R.back() * (1 + 1e-9))
    throw std::invalid_argument("pinch interval is not inside the profile's radius range");
  PinchReport rep;
  rep.Lambda = Lambda;
  rep.eps = eps;
  rep.r1 = r1;
  rep.r2 = r2;
  for (size_t i = 0; i < R.size(); ++i) {
    if (R[i] < r1 * (1 - 1e-12) || R[i] > r2 * (1 + 1e-12)) continue;
    rep.max_deviation = std::max(rep.max_deviation, std::abs(profile.N[i] - Lambda));
    ++rep.samples;
  }
  if (rep.samples == 0) throw std::invalid_argument("no profile radius inside the pinch interval");
  rep.pinched = rep.max_deviation <= eps;
  return rep;
}

std::optional<double> crossing_radius(const FrequencyProfile &profile, double level) {
  const auto &R = profile.radii;
  const auto &N = profile.N;
  for (size_t i = 0; i + 1 < R.size(); ++i) {
    const double a = N[i] - level, b = N[i + 1] - level;
    if (a == 0) return R[i];
    if (a * b < 0) {
      const double f = a / (a - b);
      return std::exp(std::log(R[i]) + f * (std::log(R[i + 1]) - std::log(R[i])));
    }
  }
  if (!N.empty() && N.back() == level) return R.back();
  return std::nullopt;
}

double empirical_monotonicity_constant(const FrequencyProfile &profile) {
  double C = 0;
  for (size_t i = 0; i + 1 < profile.radii.size(); ++i) {
    if (!(profile.N[i] > 0 && profile.N[i + 1] > 0)) continue;
    C = std::max(C, std::log(profile.N[i] / profile.N[i + 1]) / (profile.radii[i + 1] - profile.radii[i]));
  }
  return C;
}

HopReport boundary_hop(const Field &u, const Vec &X0, double gamma, const AmbientConfig &cfg,
                       const FrequencyOptions &opts) {
  if (!(gamma > 3)) throw std::invalid_argument("boundary hopping needs gamma > 3");
  HopReport rep;
  rep.gamma = gamma;
  rep.delta = delta(X0, cfg);
  if (!(rep.delta > 0)) throw std::invalid_argument("boundary hopping needs a center off R^d");
  Vec P = X0;
  P.tail(cfg.m()).setZero();
  rep.N_off = frequency_profile(u, X0, {gamma * rep.delta}, cfg, opts).N[0];
  const auto prof = frequency_profile(u, P, {(gamma - 2) * rep.delta, (gamma + 2) * rep.delta}, cfg, opts);
  rep.N_low = prof.N[0];
  rep.N_high = prof.N[1];
  rep.C = std::max({0.0, gamma * std::log(rep.N_low / rep.N_off), gamma * std::log(rep.N_off / rep.N_high)});
  return rep;
}

namespace {

// Quasi-random points of B_1 with delta >= dmin.
Mat ball_grid(const AmbientConfig &cfg, int count, double dmin) {
  boost::random::sobol eng(cfg.n);
  boost::random::uniform_01<double> U;
  Mat P(cfg.n, count);
  int k = 0;
  Vec v(cfg.n);
  while (k < count) {
    for (int i = 0; i < cfg.n; ++i) v(i) = 2 * U(eng) - 1;
    if (v.squaredNorm() >= 1.0 || v.tail(cfg.m()).norm() < dmin) continue;
    P.col(k++) = v;
  }
  return P;
}

double dist_impl(const Field &u, const Vec &X0, const std::vector<double> &scales, double Lambda,
                 const AmbientConfig &cfg, const DistanceOptions &opts) {
  const FrequencySet F = frequency_set(cfg, std::max(Lambda, 1.0) + 1e-6);
  const FrequencyEntry *e = F.find(Lambda);
  if (!e) {
    std::ostringstream os;
    os << "Lambda = " << Lambda << " is not in the frequency set";
    throw std::invalid_argument(os.str());
  }
  std::vector<TermField> span;
  for (const Mode &md : homogeneous_space_modes(cfg, *e)) span.push_back(md.field(cfg.d));
  const Mat G = ball_grid(cfg, opts.grid_points, opts.delta_exclude);
  const int N = static_cast<int>(G.cols()), K = static_cast<int>(span.size());

  Mat Phi(N, K);
  for (int l = 0; l < K; ++l)
    for (int i = 0; i < N; ++i) Phi(i, l) = span[l].value(G.col(i));
  const Vec colscale = Phi.colwise().norm().transpose().cwiseMax(1e-300).cwiseInverse();
  Phi = Phi * colscale.asDiagonal();

  const int S = static_cast<int>(scales.size());
  Vec b(N * S);
  for (int s = 0; s < S; ++s) {
    Vec f(N);
    for (int i = 0; i < N; ++i) f(i) = u.value(X0 + scales[s] * G.col(i));
    const double sup = f.cwiseAbs().maxCoeff();
    if (!(sup > 0)) throw std::invalid_argument("u vanishes on the sample of B_r");
    b.segment(s * N, N) = f / sup;
  }
  Mat A(N * S, K);
  for (int s = 0; s < S; ++s) A.block(s * N, 0, N, K) = Phi;

  // Lawson iteration for the minimax fit, seeded by least squares.
  Vec w = Vec::Constant(N * S, 1.0 / (N * S));
  double best = 1e300;
  for (int it = 0; it <= opts.lawson_iterations; ++it) {
    const Mat AtW = A.transpose() * w.asDiagonal();
    const Vec c = (AtW * A).ldlt().solve(AtW * b);
    const Vec res = b - A * c;
    const Vec ares = res.cwiseAbs();
    best = std::min(best, ares.maxCoeff());
    const Vec nw = w.cwiseProduct(ares);
    const double tot = nw.sum();
    if (!(tot > 0)) break;
    w = nw / tot;
  }
  return best;
}

}  // namespace

double dist_to_H_Lambda(const Field &u, const Vec &X0, double r, double Lambda, const AmbientConfig &cfg,
                        const DistanceOptions &opts) {
  if (!(r > 0)) throw std::invalid_argument("radius must be positive");
  return dist_impl(u, X0, {r}, Lambda, cfg, opts);
}

double dist_to_H_Lambda(const Field &u, const Vec &X0, double r1, double r2, double Lambda, const AmbientConfig &cfg,
                        const DistanceOptions &opts) {
  if (!(0 < r1 && r1 <= r2)) throw std::invalid_argument("need 0 < r1 <= r2");
  std::vector<double> s;
  const int k = std::max(1, opts.scales);
  for (int i = 0; i < k; ++i) s.push_back(k == 1 ? r1 : r1 * std::pow(r2 / r1, double(i) / (k - 1)));
  return dist_impl(u, X0, s, Lambda, cfg, opts);
}

}  // namespace cofreq
