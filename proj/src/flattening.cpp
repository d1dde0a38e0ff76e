#include "cofreq/flattening.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>
#include <tbb/parallel_for.h>

#include "cofreq/quadrature.hpp"

namespace cofreq {

namespace {

Vec uniform_ball(int dim, double radius, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = g(rng);
  return v.normalized() * radius * std::pow(u(rng), 1.0 / dim);
}

Vec unit_direction(int dim, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = g(rng);
  return v.normalized();
}

SphereRule direction_rule(int d, int angular) {
  QuadratureOptions q;
  q.s1_nodes = angular;
  q.s2_lat = std::max(4, angular / 4);
  q.s3_lat = std::max(4, angular / 6);
  q.theta_nodes = std::max(8, angular / 2);
  return sphere_rule(d, q);
}

Vec unit_vector_or(const Vec &e, int m) {
  if (e.size() == 0) return Vec::Unit(m, 0);
  if (e.size() != m) throw std::invalid_argument("direction has the wrong length");
  return e.normalized();
}

double op_norm(const Mat &A) {
  if (A.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(A).singularValues()(0);
}

double sym_norm(const Mat &A) {
  return Eigen::SelfAdjointEigenSolver<Mat>(A, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

GraphDomain GraphDomain::flat(const AmbientConfig &cfg, double r0) {
  return linear(cfg, Mat::Zero(cfg.m(), cfg.d), r0);
}

GraphDomain GraphDomain::linear(const AmbientConfig &cfg, const Mat &L, double r0) {
  const int d = cfg.d, m = cfg.m();
  if (L.rows() != m || L.cols() != d) throw std::invalid_argument("L must be m x d");
  GraphDomain G;
  G.n = cfg.n;
  G.d = d;
  G.family = L.isZero(0.0) ? "flat" : "linear";
  G.phi = [L](const Vec &x) -> Vec { return L * x; };
  G.dphi = [L](const Vec &) -> Mat { return L; };
  G.d2phi = [d, m](const Vec &) { return std::vector<Mat>(m, Mat::Zero(d, d)); };
  G.C2 = 0.0;
  G.r0 = r0;
  G.affine = true;
  return G;
}

GraphDomain GraphDomain::paraboloid(const AmbientConfig &cfg, double kappa, double r0, Vec e) {
  const int d = cfg.d, m = cfg.m();
  const Vec u = unit_vector_or(e, m);
  GraphDomain G;
  G.n = cfg.n;
  G.d = d;
  G.family = "paraboloid";
  G.phi = [u, kappa](const Vec &x) -> Vec { return (0.5 * kappa * x.squaredNorm()) * u; };
  G.dphi = [u, kappa](const Vec &x) -> Mat { return kappa * u * x.transpose(); };
  G.d2phi = [u, kappa, d, m](const Vec &) {
    std::vector<Mat> H(m);
    for (int j = 0; j < m; ++j) H[j] = kappa * u(j) * Mat::Identity(d, d);
    return H;
  };
  G.C2 = std::abs(kappa);
  G.r0 = r0;
  return G;
}

GraphDomain GraphDomain::trig_bump(const AmbientConfig &cfg, double a, double k, double r0, Vec e) {
  const int d = cfg.d, m = cfg.m();
  const Vec u = unit_vector_or(e, m);
  GraphDomain G;
  G.n = cfg.n;
  G.d = d;
  G.family = "trig_bump";
  G.phi = [u, a, k](const Vec &x) -> Vec {
    double p = a;
    for (int i = 0; i < x.size(); ++i) p *= std::cos(k * x(i));
    return p * u;
  };
  G.dphi = [u, a, k, d](const Vec &x) -> Mat {
    Vec g(d);
    for (int i = 0; i < d; ++i) {
      double p = -a * k * std::sin(k * x(i));
      for (int j = 0; j < d; ++j)
        if (j != i) p *= std::cos(k * x(j));
      g(i) = p;
    }
    return u * g.transpose();
  };
  G.d2phi = [u, a, k, d, m](const Vec &x) {
    Mat H(d, d);
    for (int i = 0; i < d; ++i)
      for (int l = 0; l < d; ++l) {
        double p = a * k * k;
        for (int j = 0; j < d; ++j) {
          if (j == i && j == l) p *= -std::cos(k * x(j));
          else if (j == i || j == l) p *= -std::sin(k * x(j));
          else p *= std::cos(k * x(j));
        }
        H(i, l) = p;
      }
    std::vector<Mat> out(m);
    for (int j = 0; j < m; ++j) out[j] = u(j) * H;
    return out;
  };
  G.C2 = std::abs(a) * k * k * d;
  G.r0 = r0;
  return G;
}

Vec GraphDomain::point(const Vec &x) const {
  Vec P(n);
  P.head(d) = x;
  P.tail(m()) = phi(x);
  return P;
}

double GraphDomain::area_factor(const Vec &x) const {
  const Mat D = dphi(x);
  return std::sqrt((Mat::Identity(d, d) + D.transpose() * D).determinant());
}

Vec GraphDomain::foot(const Vec &X) const {
  Vec y = X.head(d);
  for (int it = 0; it < 50; ++it) {
    Mat J(n, d);
    J.topRows(d).setIdentity();
    J.bottomRows(m()) = dphi(y);
    const Vec r = point(y) - X;
    const Vec dy = (J.transpose() * J).ldlt().solve(-J.transpose() * r);
    y += dy;
    if (dy.norm() <= 1e-15 * (1.0 + y.norm())) break;
  }
  return y;
}

double GraphDomain::distance(const Vec &X) const { return (X - point(foot(X))).norm(); }

double GraphDomain::sampled_lipschitz(double radius, int pairs, unsigned long seed) const {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Vec x = uniform_ball(d, radius, rng), y = uniform_ball(d, radius, rng);
    const double dx = (x - y).norm();
    if (dx < 1e-12) continue;
    best = std::max(best, op_norm(dphi(x) - dphi(y)) / dx);
  }
  return best;
}

double GraphDomain::sampled_slope(double radius, int samples, unsigned long seed) const {
  std::mt19937_64 rng(seed);
  double best = op_norm(dphi(Vec::Zero(d)));
  for (int k = 0; k < samples; ++k) best = std::max(best, op_norm(dphi(uniform_ball(d, radius, rng))));
  return best;
}

double c_beta(int d, double beta) {
  if (!(beta > 0)) throw std::invalid_argument("c_beta needs beta > 0");
  if (d < 1) throw std::invalid_argument("c_beta needs d >= 1");
  return std::pow(std::numbers::pi, 0.5 * d) * std::exp(std::lgamma(0.5 * beta) - std::lgamma(0.5 * (d + beta)));
}

double c_beta_quadrature(int d, double beta) {
  if (!(beta > 0)) throw std::invalid_argument("c_beta needs beta > 0");
  boost::math::quadrature::exp_sinh<double> integrator;
  const double p = -0.5 * (d + beta);
  const double radial =
      integrator.integrate([&](double r) { return std::pow(r, d - 1) * std::pow(1.0 + r * r, p); }, 1e-14);
  return sphere_area(d) * radial;
}

double D_beta(const Vec &X, const GraphDomain &G, double beta, const RegDistOptions &opts) {
  if (!(beta > 1)) throw std::invalid_argument("D_beta needs beta > 1");
  const int d = G.d;
  const Vec y0 = G.foot(X);
  const double delta = (X - G.point(y0)).norm();
  if (delta <= opts.on_graph_tol * std::max(1.0, X.norm())) throw std::domain_error("D_beta evaluated on the graph");

  const int K = static_cast<int>(std::ceil(std::log2(1.0 / opts.tail_tol) / beta)) + 1;
  std::vector<double> edges = {0.0, delta / 4, delta / 2};
  for (int k = 0; k <= K; ++k) edges.push_back(delta * std::ldexp(1.0, k));
  const SphereRule dirs = direction_rule(d, opts.angular_nodes);
  Vec gn, gw;
  gauss_legendre(opts.radial_nodes, 0.0, 1.0, gn, gw);

  const double p = -0.5 * (d + beta);
  double sum = 0.0;
  for (size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e], len = edges[e + 1] - edges[e];
    for (int i = 0; i < gn.size(); ++i) {
      const double r = a + len * gn(i);
      const double wr = len * gw(i) * std::pow(r, d - 1);
      for (int k = 0; k < dirs.size(); ++k) {
        const Vec y = y0 + r * dirs.nodes.col(k);
        sum += wr * dirs.weights(k) * std::pow((X - G.point(y)).squaredNorm(), p) * G.area_factor(y);
      }
    }
  }
  const double R = edges.back();
  const double uR = delta * delta / (R * R + delta * delta);
  sum += sphere_area(d) * 0.5 * std::pow(delta, -beta) * boost::math::beta(0.5 * beta, 0.5 * d, uR);
  return std::pow(sum, -1.0 / beta);
}

double FlatteningMap::theta(double q) {
  if (q <= 0.5) return 1.0;
  if (q >= 1.0) return 0.0;
  const double u = 2.0 * (1.0 - q);
  const double f = std::exp(-1.0 / u), g = std::exp(-1.0 / (1.0 - u));
  return f / (f + g);
}

FlatteningMap::FlatteningMap(GraphDomain G, const FlatteningOptions &opts) : G_(std::move(G)), opts_(opts) {
  if (!(opts_.beta > 1)) throw std::invalid_argument("flattening needs beta > 1");
  if (!G_.phi || !G_.dphi) throw std::invalid_argument("graph needs phi and dphi");
  const int d = G_.d;
  cbeta_ = c_beta(d, opts_.beta);

  eps_ = G_.sampled_slope(2.0 * G_.r0);
  if (eps_ > opts_.epsilon) {
    throw std::invalid_argument("graph slope " + std::to_string(eps_) + " exceeds epsilon " +
                                std::to_string(opts_.epsilon) + " on the window; use a smaller window r0");
  }

  const SphereRule dirs = direction_rule(d, opts_.angular_nodes);
  dirs_ = dirs.nodes;
  dir_weights_ = dirs.weights;

  Vec rn, rw;
  gauss_legendre(opts_.mollifier_nodes, 0.0, 1.0, rn, rw);
  const int K = static_cast<int>(rn.size()) * dirs.size();
  moll_nodes_.resize(d, K);
  moll_weights_.resize(K);
  int idx = 0;
  for (int i = 0; i < rn.size(); ++i) {
    const double eta = std::exp(-1.0 / (1.0 - rn(i) * rn(i)));
    for (int k = 0; k < dirs.size(); ++k, ++idx) {
      moll_nodes_.col(idx) = rn(i) * dirs.nodes.col(k);
      moll_weights_(idx) = eta * std::pow(rn(i), d - 1) * rw(i) * dirs.weights(k);
    }
  }
  moll_weights_ /= moll_weights_.sum();

  gauss_legendre(opts_.lambda_nodes, 0.0, 0.5, inner_q_, inner_w_);
  gauss_legendre(opts_.lambda_nodes, 0.5, 1.0, trans_q_, trans_w_);
  double radial = 0.0;
  for (int i = 0; i < inner_q_.size(); ++i) radial += inner_w_(i) * std::pow(inner_q_(i), d - 1);
  for (int i = 0; i < trans_q_.size(); ++i) radial += trans_w_(i) * theta(trans_q_(i)) * std::pow(trans_q_(i), d - 1);
  a0_ = dir_weights_.sum() * radial;
}

double FlatteningMap::suggested_window() const {
  if (G_.C2 <= 0.0) return INFINITY;
  return opts_.epsilon / (G_.C2 * opts_.M);
}

Vec FlatteningMap::phi_s(const Vec &x, double s) const {
  if (s < 1e-8) return G_.phi(x);
  Vec out = Vec::Zero(G_.m());
  for (int k = 0; k < moll_weights_.size(); ++k) out += moll_weights_(k) * G_.phi(x - s * moll_nodes_.col(k));
  return out;
}

Mat FlatteningMap::dphi_s(const Vec &x, double s) const {
  if (s < 1e-8) return G_.dphi(x);
  Mat out = Mat::Zero(G_.m(), G_.d);
  for (int k = 0; k < moll_weights_.size(); ++k) out += moll_weights_(k) * G_.dphi(x - s * moll_nodes_.col(k));
  return out;
}

Vec FlatteningMap::Phi_s(const Vec &x, double s) const {
  Vec P(G_.n);
  P.head(G_.d) = x;
  P.tail(G_.m()) = phi_s(x, s);
  return P;
}

double FlatteningMap::lambda(const Vec &x, double r) const {
  if (!(r > 0)) throw std::invalid_argument("lambda needs r > 0");
  const int d = G_.d;
  const Vec c = Phi_s(x, r);
  const double off = (G_.point(x) - c).norm();
  if (off >= 0.5 * r) throw std::runtime_error("mollified graph too far from the graph; use a smaller window");
  boost::math::tools::eps_tolerance<double> tol(50);
  double sum = 0.0;
  for (int k = 0; k < dirs_.cols(); ++k) {
    const Vec om = dirs_.col(k);
    auto q = [&](double s) { return (G_.point(x + s * om) - c).norm() / r; };
    auto root = [&](double target, double lo) {
      double hi = target * r + off + 1e-12 * r;
      if (q(hi) - target == 0.0) return hi;
      std::uintmax_t iters = 100;
      const auto br = boost::math::tools::toms748_solve([&](double s) { return q(s) - target; }, lo, hi, tol, iters);
      return 0.5 * (br.first + br.second);
    };
    const double ra = root(0.5, 0.0);
    const double rb = root(1.0, ra);
    double part = 0.0;
    for (int i = 0; i < inner_q_.size(); ++i) {
      const double s = 2.0 * ra * inner_q_(i);
      part += 2.0 * ra * inner_w_(i) * std::pow(s, d - 1) * G_.area_factor(x + s * om);
    }
    for (int i = 0; i < trans_q_.size(); ++i) {
      const double s = ra + 2.0 * (rb - ra) * (trans_q_(i) - 0.5);
      const Vec y = x + s * om;
      part += 2.0 * (rb - ra) * trans_w_(i) * std::pow(s, d - 1) * theta((G_.point(y) - c).norm() / r) *
              G_.area_factor(y);
    }
    sum += dir_weights_(k) * part;
  }
  return sum / (a0_ * std::pow(r, d));
}

double FlatteningMap::h(const Vec &x, double r) const {
  return std::pow(cbeta_ * lambda(x, r), 1.0 / opts_.beta);
}

Mat FlatteningMap::frame(const Vec &x, double r) const {
  const int d = G_.d, m = G_.m(), n = G_.n;
  const Mat D = dphi_s(x, r);
  Mat V(n, d), W(n, m);
  V.topRows(d).setIdentity();
  V.bottomRows(m) = D;
  W.topRows(d) = -D.transpose();
  W.bottomRows(m).setIdentity();
  Mat R(n, n);
  R.leftCols(d) = orthonormalize_columns(V);
  R.rightCols(m) = orthonormalize_columns(W);
  return R;
}

Vec FlatteningMap::rho(const Vec &X) const {
  const int d = G_.d, m = G_.m();
  const Vec x = X.head(d), t = X.tail(m);
  const double r = t.norm();
  if (r == 0.0) return G_.point(x);
  const Mat R = frame(x, r);
  return Phi_s(x, r) + h(x, r) * R.rightCols(m) * t;
}

Mat FlatteningMap::jacobian(const Vec &X) const {
  const int d = G_.d, m = G_.m(), n = G_.n;
  JacobianMode mode = opts_.jacobian;
  if (mode == JacobianMode::Auto) mode = G_.affine ? JacobianMode::Analytic : JacobianMode::FiniteDifference;
  const double r = X.tail(m).norm();
  if (mode == JacobianMode::Analytic) {
    if (!G_.affine) throw std::invalid_argument("analytic Jacobian is only available for affine graphs");
    // phi_r = phi, frames and h are constant in (x, r)
    const Vec x = X.head(d);
    const double rr = r > 0 ? r : G_.r0;
    Mat J(n, n);
    J.topLeftCorner(d, d).setIdentity();
    J.bottomLeftCorner(m, d) = G_.dphi(x);
    J.rightCols(m) = h(x, rr) * frame(x, rr).rightCols(m);
    return J;
  }
  if (!(r > 0)) throw std::domain_error("finite-difference Jacobian needs |t| > 0");
  const double step = std::min(opts_.fd_step, r / 100);
  Mat J(n, n);
  for (int j = 0; j < n; ++j) {
    Vec Xp = X, Xm = X;
    Xp(j) += step;
    Xm(j) -= step;
    J.col(j) = (rho(Xp) - rho(Xm)) / (2 * step);
  }
  return J;
}

FlatteningMap build_flattening(const GraphDomain &G, const FlatteningOptions &opts) { return FlatteningMap(G, opts); }

Mat conjugated_matrix(const FlatteningMap &map, const Vec &X) {
  const GraphDomain &G = map.domain();
  const int m = G.m();
  const double r = X.tail(m).norm();
  if (!(r > 0)) throw std::domain_error("conjugated matrix needs |t| > 0");
  const Mat J = map.jacobian(X);
  const Eigen::FullPivLU<Mat> lu(J);
  const double det = lu.determinant();
  if (!lu.isInvertible() || std::abs(det) < 1e-12) throw std::runtime_error("singular Jacobian: rho is not bi-Lipschitz here");
  const Mat Jinv = lu.inverse();
  const double D = D_beta(map.rho(X), G, map.beta(), map.options().regdist);
  const Mat A = std::pow(r / D, m - 1) * std::abs(det) * Jinv * Jinv.transpose();
  return 0.5 * (A + A.transpose());
}

BiLipschitzReport bilipschitz_ratio(const FlatteningMap &map, int points, double radius, unsigned long seed) {
  const GraphDomain &G = map.domain();
  const int n = G.n, d = G.d;
  std::mt19937_64 rng(seed);
  std::vector<Vec> X(points), Y(points), Y0(points);
  for (int i = 0; i < points; ++i) X[i] = uniform_ball(n, radius, rng);
  tbb::parallel_for(0, points, [&](int i) { Y[i] = map.rho(X[i]); });
  const double h0 = std::pow(map.cbeta(), 1.0 / map.beta());
  for (int i = 0; i < points; ++i) {
    Y0[i] = X[i];
    Y0[i].tail(n - d) *= h0;
  }
  BiLipschitzReport rep;
  rep.lower = rep.raw_lower = INFINITY;
  rep.upper = rep.raw_upper = 0.0;
  for (int i = 0; i < points; ++i)
    for (int j = i + 1; j < points; ++j) {
      const double num = (Y[i] - Y[j]).norm();
      const double rel = num / (Y0[i] - Y0[j]).norm(), raw = num / (X[i] - X[j]).norm();
      rep.lower = std::min(rep.lower, rel);
      rep.upper = std::max(rep.upper, rel);
      rep.raw_lower = std::min(rep.raw_lower, raw);
      rep.raw_upper = std::max(rep.raw_upper, raw);
      ++rep.pairs;
    }
  return rep;
}

C01Report check_C01(const MatrixField &A, const AmbientConfig &cfg, const C01Options &opts) {
  const int n = cfg.n, d = cfg.d, m = cfg.m();
  const int P = opts.points_per_shell, S = opts.shells;
  if (P < 1 || S < 2) throw std::invalid_argument("check_C01 needs at least one point and two shells");
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> xs(P), dirs(P);
  std::vector<double> us(P);
  for (int i = 0; i < P; ++i) {
    xs[i] = uniform_ball(d, opts.x_radius, rng);
    dirs[i] = unit_direction(m, rng);
    us[i] = unif(rng);
  }
  auto at = [&](const Vec &x, const Vec &t) {
    Vec X(n);
    X << x, t;
    return A(X);
  };
  // A(x, 0+) by linear extrapolation from trace_delta, averaged over +-e_j
  auto trace = [&](const Vec &x) {
    Mat T = Mat::Zero(n, n);
    for (int j = 0; j < m; ++j)
      for (int sgn : {-1, 1}) {
        const Vec e = sgn * Vec::Unit(m, j);
        T += 2.0 * at(x, opts.trace_delta * e) - at(x, 2.0 * opts.trace_delta * e);
      }
    return Mat(T / (2.0 * m));
  };
  auto split = [&](const Mat &T, Mat &J, double &h) {
    J = T.topLeftCorner(d, d);
    h = T.bottomRightCorner(m, m).trace() / m;
  };

  C01Report rep;
  std::vector<Mat> B(P);
  rep.trace_x = xs;
  rep.trace_J.resize(P);
  rep.trace_h.resize(P);
  tbb::parallel_for(0, P, [&](int i) {
    split(trace(xs[i]), rep.trace_J[i], rep.trace_h[i]);
    B[i] = Mat::Zero(n, n);
    B[i].topLeftCorner(d, d) = rep.trace_J[i];
    B[i].bottomRightCorner(m, m) = rep.trace_h[i] * Mat::Identity(m, m);
  });

  const int TG = std::min(opts.trace_grad_points, P);
  std::vector<double> tgrad(TG, 0.0);
  tbb::parallel_for(0, TG, [&](int i) {
    double gJ = 0.0, gh = 0.0;
    for (int k = 0; k < d; ++k) {
      Vec xp = xs[i], xm = xs[i];
      xp(k) += opts.grad_step;
      xm(k) -= opts.grad_step;
      Mat Jp, Jm;
      double hp, hm;
      split(trace(xp), Jp, hp);
      split(trace(xm), Jm, hm);
      gJ += ((Jp - Jm) / (2 * opts.grad_step)).squaredNorm();
      gh += std::pow((hp - hm) / (2 * opts.grad_step), 2);
    }
    tgrad[i] = std::sqrt(gJ) + std::sqrt(gh);
  });
  for (double g : tgrad) rep.trace_grad_sup = std::max(rep.trace_grad_sup, g);

  std::vector<double> defect(P * S), ratio(P * S), grad(P * S), lo_eig(P * S), hi_eig(P * S), scale(P * S);
  std::vector<double> edges(S + 1);
  for (int k = 0; k <= S; ++k) edges[k] = opts.delta_lo * std::pow(opts.delta_hi / opts.delta_lo, double(k) / S);
  tbb::parallel_for(0, P * S, [&](int idx) {
    const int k = idx / P, i = idx % P;
    const double delta = edges[k] * std::pow(edges[k + 1] / edges[k], us[i]);
    Vec X(n);
    X << xs[i], delta * dirs[i];
    const Mat Ax = A(X);
    const Eigen::SelfAdjointEigenSolver<Mat> es(Ax, Eigen::EigenvaluesOnly);
    lo_eig[idx] = es.eigenvalues().minCoeff();
    hi_eig[idx] = es.eigenvalues().maxCoeff();
    scale[idx] = Ax.norm();
    defect[idx] = sym_norm(Ax - B[i]);
    ratio[idx] = defect[idx] / delta;
    const double g = std::min(opts.grad_step, delta / 4);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      Vec Xp = X, Xm = X;
      Xp(j) += g;
      Xm(j) -= g;
      acc += ((A(Xp) - A(Xm)) / (2 * g)).squaredNorm();
    }
    grad[idx] = std::sqrt(acc);
  });

  double lo = INFINITY, hi = 0.0, top = 0.0;
  for (int idx = 0; idx < P * S; ++idx) {
    lo = std::min(lo, lo_eig[idx]);
    hi = std::max(hi, hi_eig[idx]);
    top = std::max(top, scale[idx]);
    rep.grad_sup = std::max(rep.grad_sup, grad[idx]);
  }
  rep.ellipticity = lo > 0 ? std::min(lo, 1.0 / hi) : 0.0;

  rep.exact = true;
  for (int k = 0; k < S; ++k) {
    C01Shell sh;
    sh.delta_lo = edges[k];
    sh.delta_hi = edges[k + 1];
    for (int i = 0; i < P; ++i) {
      sh.defect = std::max(sh.defect, defect[k * P + i]);
      sh.ratio = std::max(sh.ratio, ratio[k * P + i]);
    }
    if (sh.defect > 1e-12 * top) rep.exact = false;
    rep.shells.push_back(sh);
  }
  if (rep.exact) {
    rep.C = 0.0;
    rep.C_variation = 1.0;
    rep.slope = 1.0;
    rep.pass = std::isfinite(rep.grad_sup);
    return rep;
  }

  double rmin = INFINITY, rmax = 0.0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const C01Shell &sh : rep.shells) {
    rmin = std::min(rmin, sh.ratio);
    rmax = std::max(rmax, sh.ratio);
    const double lx = 0.5 * (std::log(sh.delta_lo) + std::log(sh.delta_hi));
    const double ly = std::log(std::max(sh.ratio, 1e-300)) + lx;
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  rep.C = rmax;
  rep.C_variation = rmin > 0 ? rmax / rmin : INFINITY;
  rep.slope = (S * sxy - sx * sy) / (S * sxx - sx * sx);
  rep.pass = std::isfinite(rep.C) && std::isfinite(rep.grad_sup) && rep.slope >= opts.slope_threshold;
  return rep;
}

}  // namespace cofreq
