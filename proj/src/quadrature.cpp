#include "cofreq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cofreq {

namespace {

constexpr double kPi = std::numbers::pi;

SphereRule product(const SphereRule &a, const SphereRule &b, const Vec &theta, const Vec &wtheta) {
  // point (cos(theta) xi, sin(theta) eta), weight cos^{ka-1} sin^{kb-1}
  const int ka = static_cast<int>(a.nodes.rows());
  const int kb = static_cast<int>(b.nodes.rows());
  const int N = static_cast<int>(theta.size()) * a.size() * b.size();
  SphereRule out;
  out.nodes.resize(ka + kb, N);
  out.weights.resize(N);
  int idx = 0;
  for (int i = 0; i < theta.size(); ++i) {
    const double c = std::cos(theta(i)), s = std::sin(theta(i));
    const double wt = wtheta(i) * std::pow(c, ka - 1) * std::pow(s, kb - 1);
    for (int p = 0; p < a.size(); ++p)
      for (int q = 0; q < b.size(); ++q) {
        out.nodes.col(idx).head(ka) = c * a.nodes.col(p);
        out.nodes.col(idx).tail(kb) = s * b.nodes.col(q);
        out.weights(idx) = wt * a.weights(p) * b.weights(q);
        ++idx;
      }
  }
  return out;
}

}  // namespace

QuadratureOptions QuadratureOptions::scaled(double f) const {
  QuadratureOptions o = *this;
  auto sc = [f](int v) { return std::max(2, static_cast<int>(std::lround(v * f))); };
  o.theta_nodes = sc(theta_nodes);
  o.s1_nodes = sc(s1_nodes);
  o.s2_lat = sc(s2_lat);
  o.s3_lat = sc(s3_lat);
  o.radial_nodes = sc(radial_nodes);
  return o;
}

void gauss_legendre(int k, double a, double b, Vec &nodes, Vec &weights) {
  if (k < 1) throw std::invalid_argument("Gauss-Legendre needs at least one node");
  nodes.resize(k);
  weights.resize(k);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (k + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= k; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = k * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= k; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = k * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes(i) = mid - half * z;
    nodes(k - 1 - i) = mid + half * z;
    weights(i) = weights(k - 1 - i) = half * w;
  }
}

double sphere_area(int k) { return 2.0 * std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k); }

SphereRule sphere_rule(int k, const QuadratureOptions &opts) {
  SphereRule r;
  if (k < 1) throw std::invalid_argument("sphere dimension must be positive");
  if (k == 1) {
    r.nodes.resize(1, 2);
    r.nodes << 1.0, -1.0;
    r.weights = Vec::Ones(2);
    return r;
  }
  if (k == 2) {
    const int N = opts.s1_nodes;
    r.nodes.resize(2, N);
    r.weights = Vec::Constant(N, 2 * kPi / N);
    for (int i = 0; i < N; ++i) {
      const double a = 2 * kPi * i / N;
      r.nodes(0, i) = std::cos(a);
      r.nodes(1, i) = std::sin(a);
    }
    return r;
  }
  if (k == 3) {
    Vec z, wz;
    gauss_legendre(opts.s2_lat, -1.0, 1.0, z, wz);
    const int na = 2 * opts.s2_lat;
    r.nodes.resize(3, z.size() * na);
    r.weights.resize(z.size() * na);
    int idx = 0;
    for (int i = 0; i < z.size(); ++i) {
      const double s = std::sqrt(1 - z(i) * z(i));
      for (int j = 0; j < na; ++j) {
        const double a = 2 * kPi * (j + 0.5) / na;
        r.nodes.col(idx) << s * std::cos(a), s * std::sin(a), z(i);
        r.weights(idx) = wz(i) * 2 * kPi / na;
        ++idx;
      }
    }
    return r;
  }
  if (k == 4) {
    // Hopf coordinates (sqrt(1-u) a, sqrt(u) b), measure (1/2) du da db
    Vec u, wu;
    gauss_legendre(opts.s3_lat, 0.0, 1.0, u, wu);
    QuadratureOptions c = opts;
    c.s1_nodes = 2 * opts.s3_lat;
    const SphereRule circ = sphere_rule(2, c);
    const int N = static_cast<int>(u.size()) * circ.size() * circ.size();
    r.nodes.resize(4, N);
    r.weights.resize(N);
    int idx = 0;
    for (int i = 0; i < u.size(); ++i) {
      const double ca = std::sqrt(1 - u(i)), sb = std::sqrt(u(i));
      for (int p = 0; p < circ.size(); ++p)
        for (int q = 0; q < circ.size(); ++q) {
          r.nodes.col(idx).head(2) = ca * circ.nodes.col(p);
          r.nodes.col(idx).tail(2) = sb * circ.nodes.col(q);
          r.weights(idx) = 0.5 * wu(i) * circ.weights(p) * circ.weights(q);
          ++idx;
        }
    }
    return r;
  }
  const int a = k / 2, b = k - a;
  Vec th, wth;
  gauss_legendre(opts.theta_nodes, 0.0, kPi / 2, th, wth);
  return product(sphere_rule(a, opts), sphere_rule(b, opts), th, wth);
}

SplitSphereRule::SplitSphereRule(const AmbientConfig &cfg, const QuadratureOptions &opts) : cfg_(cfg) {
  const int d = cfg.d, m = cfg.m();
  Vec th, wth;
  gauss_legendre(opts.theta_nodes, 0.0, kPi / 2, th, wth);
  const SphereRule sx = sphere_rule(d, opts);
  const SphereRule st = sphere_rule(m, opts);
  const int N = static_cast<int>(th.size()) * sx.size() * st.size();
  nodes_.resize(d + m, N);
  weights_.resize(N);
  sin_theta_.resize(N);
  int idx = 0;
  for (int i = 0; i < th.size(); ++i) {
    const double c = std::cos(th(i)), s = std::sin(th(i));
    const double wt = wth(i) * std::pow(c, d - 1);
    for (int p = 0; p < sx.size(); ++p)
      for (int q = 0; q < st.size(); ++q) {
        nodes_.col(idx).head(d) = c * sx.nodes.col(p);
        nodes_.col(idx).tail(m) = s * st.nodes.col(q);
        weights_(idx) = wt * sx.weights(p) * st.weights(q);
        sin_theta_(idx) = s;
        ++idx;
      }
  }
}

QuadratureRule SplitSphereRule::scaled(const Vec &center, double rho) const {
  QuadratureRule q;
  q.tag = DomainTag::Sphere;
  q.nodes = (rho * nodes_).colwise() + center;
  q.weights = std::pow(rho, cfg_.d) * weights_;
  return q;
}

double apply_rule(const QuadratureRule &rule, const ScalarField &f) {
  double acc = 0.0;
  for (int i = 0; i < rule.size(); ++i) {
    const Vec Y = rule.nodes.col(i);
    const double v = f(Y);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrand is not finite at quadrature node " << i << " (" << Y.transpose() << ")";
      throw std::domain_error(os.str());
    }
    acc += rule.weights(i) * v;
  }
  return acc;
}

namespace {

bool on_boundary_plane(const Vec &center, const AmbientConfig &cfg) {
  return center.tail(cfg.m()).norm() == 0.0;
}

// Split-chart rule for dE with center on R^d and a split-preserving root M.
// Weight per node: |det M| (|zeta_t| / |M_t zeta_t|)^{m-1} d sigma_w(zeta).
QuadratureRule split_boundary_rule(const Ellipsoid &E, const AmbientConfig &cfg, const QuadratureOptions &opts) {
  const SplitSphereRule base(cfg, opts);
  QuadratureRule q = base.scaled(Vec::Zero(cfg.n), E.radius);
  q.tag = E.is_round() ? DomainTag::Sphere : DomainTag::EllipsoidBoundary;
  if (E.is_round()) {
    q.nodes.colwise() += E.center;
    return q;
  }
  const int m = cfg.m();
  const Mat &M = E.matrix_root;
  const Mat Mt = M.bottomRightCorner(m, m);
  const double det = std::abs(M.determinant());
  for (int i = 0; i < q.size(); ++i) {
    const Vec zt = q.nodes.col(i).tail(m);
    const double ratio = zt.norm() / (Mt * zt).norm();
    q.weights(i) *= det * std::pow(ratio, m - 1);
    q.nodes.col(i) = E.center + M * q.nodes.col(i);
  }
  return q;
}

// Plain product rule on S^{n-1} with the weight evaluated pointwise.
QuadratureRule plain_boundary_rule(const Ellipsoid &E, const AmbientConfig &cfg, const QuadratureOptions &opts) {
  const SphereRule s = sphere_rule(cfg.n, opts);
  const Mat &M = E.matrix_root;
  const double det = std::abs(M.determinant());
  const double r = E.radius;
  QuadratureRule q;
  q.tag = E.is_round() ? DomainTag::Sphere : DomainTag::EllipsoidBoundary;
  q.nodes.resize(cfg.n, s.size());
  q.weights.resize(s.size());
  for (int i = 0; i < s.size(); ++i) {
    const Vec Y = E.center + M * (r * s.nodes.col(i));
    const double dt = Y.tail(cfg.m()).norm();
    q.nodes.col(i) = Y;
    q.weights(i) = dt > 0 ? det * std::pow(r, cfg.n - 1) * s.weights(i) * std::pow(dt, -(cfg.m() - 1)) : 0.0;
  }
  return q;
}

}  // namespace

QuadratureRule boundary_rule(const Ellipsoid &E, const AmbientConfig &cfg, const QuadratureOptions &opts) {
  if (E.center.size() != cfg.n) throw std::invalid_argument("ellipsoid center has wrong dimension");
  if (on_boundary_plane(E.center, cfg) && E.preserves_split(cfg.d)) return split_boundary_rule(E, cfg, opts);
  return plain_boundary_rule(E, cfg, opts);
}

QuadratureRule bulk_rule(const Ellipsoid &E, const AmbientConfig &cfg, const QuadratureOptions &opts) {
  if (E.center.size() != cfg.n) throw std::invalid_argument("ellipsoid center has wrong dimension");
  if (!(E.radius > 0)) throw std::invalid_argument("radius must be positive");
  Vec s, ws;
  gauss_legendre(opts.radial_nodes, 0.0, E.radius, s, ws);
  QuadratureRule q;
  q.tag = DomainTag::BallBulk;
  if (on_boundary_plane(E.center, cfg) && E.preserves_split(cfg.d)) {
    // dm = d sigma_w(zeta) ds on each shell; the shell rule scales by rho^d.
    Ellipsoid unit(Vec::Zero(cfg.n), E.matrix_root, 1.0);
    const QuadratureRule shell = split_boundary_rule(unit, cfg, opts);
    const int N = shell.size();
    q.nodes.resize(cfg.n, N * s.size());
    q.weights.resize(N * s.size());
    for (int k = 0; k < s.size(); ++k) {
      const double fac = ws(k) * std::pow(s(k), cfg.d);
      for (int i = 0; i < N; ++i) {
        q.nodes.col(k * N + i) = E.center + s(k) * shell.nodes.col(i);
        q.weights(k * N + i) = fac * shell.weights(i);
      }
    }
    return q;
  }
  const SphereRule sph = sphere_rule(cfg.n, opts);
  const Mat &M = E.matrix_root;
  const double det = std::abs(M.determinant());
  const int N = sph.size();
  q.nodes.resize(cfg.n, N * s.size());
  q.weights.resize(N * s.size());
  for (int k = 0; k < s.size(); ++k)
    for (int i = 0; i < N; ++i) {
      const Vec Y = E.center + M * (s(k) * sph.nodes.col(i));
      const double dt = Y.tail(cfg.m()).norm();
      q.nodes.col(k * N + i) = Y;
      q.weights(k * N + i) =
          dt > 0 ? det * ws(k) * std::pow(s(k), cfg.n - 1) * sph.weights(i) * std::pow(dt, -(cfg.m() - 1)) : 0.0;
    }
  return q;
}

double bulk_quadrature_dm(const Ellipsoid &E, const ScalarField &f, const AmbientConfig &cfg,
                          const QuadratureOptions &opts) {
  return apply_rule(bulk_rule(E, cfg, opts), f);
}

double bulk_quadrature_dm(const Vec &center, double r, const ScalarField &f, const AmbientConfig &cfg,
                          const QuadratureOptions &opts) {
  if (center.size() != cfg.n) throw std::invalid_argument("center has wrong dimension");
  return bulk_quadrature_dm(Ellipsoid::ball(center, r), f, cfg, opts);
}

double boundary_quadrature_sigma_w(const Ellipsoid &E, const ScalarField &f, const AmbientConfig &cfg,
                                   const QuadratureOptions &opts) {
  return apply_rule(boundary_rule(E, cfg, opts), f);
}

BoundaryQuadratureReport boundary_quadrature_report(const Ellipsoid &E, const ScalarField &f,
                                                    const AmbientConfig &cfg, const QuadratureOptions &opts) {
  BoundaryQuadratureReport rep;
  const QuadratureRule fine = boundary_rule(E, cfg, opts);
  rep.split_chart = on_boundary_plane(E.center, cfg) && E.preserves_split(cfg.d);
  rep.value = apply_rule(fine, f);
  rep.coarse_value = apply_rule(boundary_rule(E, cfg, opts.scaled(0.5)), f);
  const double scale = std::max(std::abs(rep.value), std::abs(rep.coarse_value));
  rep.refinement_ratio = rep.coarse_value != 0.0 ? rep.value / rep.coarse_value : 1.0;
  rep.converged = scale == 0.0 || std::abs(rep.value - rep.coarse_value) <= 10 * opts.rel_tol * scale;

  // The ring nearest R^d sits at the smallest |t| among the nodes.
  double fmax = 0.0, tmin = 1e300;
  for (int i = 0; i < fine.size(); ++i) tmin = std::min(tmin, fine.nodes.col(i).tail(cfg.m()).norm());
  for (int i = 0; i < fine.size(); ++i) {
    const Vec Y = fine.nodes.col(i);
    const double v = std::abs(f(Y));
    fmax = std::max(fmax, v);
    if (Y.tail(cfg.m()).norm() <= tmin * (1 + 1e-12)) rep.equator_residual = std::max(rep.equator_residual, v);
  }
  const bool meets_boundary = rep.split_chart;
  if (meets_boundary && fmax > 0 && rep.equator_residual > 1e-3 * fmax) {
    std::ostringstream os;
    os << "integrand does not vanish on the equator: residual " << rep.equator_residual << " (max |f| " << fmax
       << ", |t| = " << tmin << ")";
    rep.diagnostics = os.str();
    if (!rep.converged)
      throw std::domain_error("divergent boundary integrand; " + rep.diagnostics);
  }
  return rep;
}

}  // namespace cofreq
