#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cofreq/ambient.hpp"

namespace cofreq {

/// Graph Gamma = {(x, phi(x))} of phi: R^d -> R^m with derivative oracles.
struct GraphDomain {
  int n = 4, d = 2;
  std::string family = "flat";
  std::function<Vec(const Vec &)> phi;                 // R^d -> R^m
  std::function<Mat(const Vec &)> dphi;                // m x d
  std::function<std::vector<Mat>(const Vec &)> d2phi;  // m Hessians, d x d
  double C2 = 0.0;   // Lipschitz bound of grad phi
  double r0 = 0.1;   // working window radius around x = 0
  bool affine = false;

  static GraphDomain flat(const AmbientConfig &cfg, double r0 = 0.1);
  /// phi(x) = L x with L of size m x d.
  static GraphDomain linear(const AmbientConfig &cfg, const Mat &L, double r0 = 0.1);
  /// phi(x) = kappa |x|^2 / 2 along the unit vector e of R^m (default e_1).
  static GraphDomain paraboloid(const AmbientConfig &cfg, double kappa, double r0 = 0.1, Vec e = Vec());
  /// phi(x) = a prod_i cos(k x_i) along e.
  static GraphDomain trig_bump(const AmbientConfig &cfg, double a, double k, double r0 = 0.1, Vec e = Vec());

  AmbientConfig ambient() const { return AmbientConfig::unchecked(n, d); }
  int m() const { return n - d; }
  /// Phi(x) = (x, phi(x)).
  Vec point(const Vec &x) const;
  /// sqrt(det(I + dphi^T dphi)).
  double area_factor(const Vec &x) const;
  /// Nearest parameter y with X closest to Phi(y) (Gauss-Newton from y = x).
  Vec foot(const Vec &X) const;
  double distance(const Vec &X) const;
  /// max |grad phi(x) - grad phi(y)| / |x - y| over random pairs in B_radius.
  double sampled_lipschitz(double radius, int pairs = 2000, unsigned long seed = 3) const;
  /// max of the operator norm of grad phi over random points of B_radius.
  double sampled_slope(double radius, int samples = 2000, unsigned long seed = 5) const;
};

/// c_beta = pi^{d/2} Gamma(beta/2) / Gamma((d + beta)/2).
double c_beta(int d, double beta);
/// Same constant from the radial integral of (1 + |y|^2)^{-(d+beta)/2} by double-exponential quadrature.
double c_beta_quadrature(int d, double beta);

struct RegDistOptions {
  int radial_nodes = 16;    // Gauss-Legendre nodes per dyadic panel
  int angular_nodes = 32;   // S^1 factor size of the direction rule
  double tail_tol = 1e-13;  // panels extend until (delta / R)^beta drops below this
  double on_graph_tol = 1e-12;
};

/// (int_Gamma |X - Y|^{-d - beta} dH^d(Y))^{-1/beta}: polar panels around the foot point, flat tail in
/// closed form. Throws std::domain_error on Gamma.
double D_beta(const Vec &X, const GraphDomain &G, double beta, const RegDistOptions &opts = {});

enum class JacobianMode { Auto, Analytic, FiniteDifference };

struct FlatteningOptions {
  double beta = 2.0;
  double epsilon = 0.05;  // required bound on |grad phi| over the mollifier reach
  double M = 100.0;       // window shrink constant, r0 <= epsilon / (C2 M) suggested
  int mollifier_nodes = 16;
  int angular_nodes = 32;
  int lambda_nodes = 24;  // Gauss-Legendre nodes on the transition of theta
  double fd_step = 1e-5;
  JacobianMode jacobian = JacobianMode::Auto;
  RegDistOptions regdist;
};

/// rho(x, t) = Phi_r(x) + h(x, r) R_{x,r}(0, t) with r = |t|.
class FlatteningMap {
 public:
  FlatteningMap(GraphDomain G, const FlatteningOptions &opts);

  const GraphDomain &domain() const { return G_; }
  const FlatteningOptions &options() const { return opts_; }
  double beta() const { return opts_.beta; }
  double cbeta() const { return cbeta_; }
  double a0() const { return a0_; }
  /// Sampled sup |grad phi| over B_{2 r0}.
  double achieved_epsilon() const { return eps_; }
  /// epsilon / (C2 M), infinite for C2 = 0.
  double suggested_window() const;

  /// eta_s * phi; phi itself for s < 1e-8.
  Vec phi_s(const Vec &x, double s) const;
  Mat dphi_s(const Vec &x, double s) const;
  Vec Phi_s(const Vec &x, double s) const;
  double lambda(const Vec &x, double r) const;
  double h(const Vec &x, double r) const;
  /// Orthogonal n x n matrix [v_1 .. v_d w_{d+1} .. w_n].
  Mat frame(const Vec &x, double r) const;
  Vec rho(const Vec &X) const;
  /// d rho_i / d X_j.
  Mat jacobian(const Vec &X) const;

  /// Normalized bump theta(|Z|): 1 on [0, 1/2], 0 from 1 on.
  static double theta(double q);

 private:
  GraphDomain G_;
  FlatteningOptions opts_;
  double cbeta_ = 1.0, a0_ = 1.0, eps_ = 0.0;
  Mat moll_nodes_;  // d x K points of B_1
  Vec moll_weights_;
  Mat dirs_;        // d x N directions of S^{d-1}
  Vec dir_weights_;
  Vec inner_q_, inner_w_, trans_q_, trans_w_;  // GL nodes on [0, 1/2] and [1/2, 1]
};

FlatteningMap build_flattening(const GraphDomain &G, const FlatteningOptions &opts = {});

/// (|t| / D_beta(rho))^{m-1} |det Jac| Jac^{-1} Jac^{-T}. Throws on |t| = 0 or a singular Jacobian.
Mat conjugated_matrix(const FlatteningMap &map, const Vec &X);

/// max / min of |rho(X) - rho(Y)| / |rho0(X) - rho0(Y)| over pairs of a sample, rho0(x, t) = (x, h0 t) the flat model,
/// together with the raw ratio range.
struct BiLipschitzReport {
  double lower = 1.0, upper = 1.0;          // relative to the flat model
  double raw_lower = 1.0, raw_upper = 1.0;  // |rho(X) - rho(Y)| / |X - Y|
  int pairs = 0;
};
BiLipschitzReport bilipschitz_ratio(const FlatteningMap &map, int points, double radius, unsigned long seed = 17);

using MatrixField = std::function<Mat(const Vec &)>;

struct C01Options {
  double delta_lo = 1e-3, delta_hi = 1e-1;
  int shells = 7;
  int points_per_shell = 16;
  double x_radius = 0.1;    // x samples in B_{x_radius} of R^d
  double trace_delta = 1e-4;
  double slope_threshold = 0.8;
  double grad_step = 1e-3;  // capped at delta / 4
  int trace_grad_points = 6;
  unsigned long seed = 19;
};

struct C01Shell {
  double delta_lo = 0, delta_hi = 0;
  double defect = 0;  // max |A - B| over the shell
  double ratio = 0;   // max |A - B| / delta
};

struct C01Report {
  double ellipticity = 0;     // lambda with spectra of A in [lambda, 1 / lambda]
  double grad_sup = 0;        // sup |grad A| on the sample
  double trace_grad_sup = 0;  // sup |grad J| + |grad h| at a few x
  double C = 0;               // max over shells of |A - B| / delta
  double C_variation = 1;     // max / min of the shell ratios
  double slope = 0;           // log |A - B| against log delta
  bool exact = false;         // A - B vanished to rounding on every shell
  bool pass = false;
  std::vector<C01Shell> shells;
  std::vector<Vec> trace_x;
  std::vector<Mat> trace_J;
  std::vector<double> trace_h;
};

/// Regression check of |A - B| <= C delta with B the block split of the trace A(x, 0+).
C01Report check_C01(const MatrixField &A, const AmbientConfig &cfg, const C01Options &opts = {});

}  // namespace cofreq
