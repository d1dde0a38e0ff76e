#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cofreq/field.hpp"
#include "cofreq/quadrature.hpp"

namespace cofreq {

struct SingularOptions {
  double tau_u = 3.0;
  double tau_g = 3.0;
  double Lambda_hat = 2.0;  // order proxy in the acceptance thresholds
  int screen_iterations = 3;
  int newton_iterations = 60;
  double svd_cutoff = 0.1;  // relative singular value cutoff in the projection steps
  bool boundary = true;          // scan the R^d lattice as well
  double boundary_order = 1.5;   // flag when the estimated vanishing order exceeds this
  int boundary_radii = 5;        // samples of the decade [rho/10, rho] for the log H slope
  double boundary_scale = 8.0;   // rho = boundary_scale * pitch
  QuadratureOptions boundary_quad = boundary_quad_default();

  static QuadratureOptions boundary_quad_default();
};

struct SingularSample {
  Vec center;
  double r0 = 1.0;
  double pitch = 0.0;
  double tau_u = 3.0, tau_g = 3.0, Lambda_hat = 2.0;
  double u_scale = 0.0;               // sup |u| on the window, the threshold normalization
  std::vector<Vec> points;            // off R^d, lexicographic order
  std::vector<Vec> boundary_points;   // flagged lattice points of R^d
  std::vector<double> boundary_orders;

  /// Both strata together.
  std::vector<Vec> all_points() const;
};

/// Multilevel scan of the window B_r0(center) for {u = |grad u| = 0}: dyadic cells down to pitch s,
/// each cell screened by a few Gauss-Newton steps on (u / h, grad u) and the survivors polished.
SingularSample sample_singular_set(const Field &u, const Vec &center, double r0, double s, const AmbientConfig &cfg,
                                   const SingularOptions &opts = {});

/// Vanishing order (slope of log H - d) / 2 over the decade [rho / 10, rho] at a point of R^d.
double boundary_vanishing_order(const Field &u, const Vec &X0, double rho, const AmbientConfig &cfg,
                                const SingularOptions &opts = {});

struct MinkowskiOptions {
  int mc_points = 20000;  // Monte Carlo points per scale
  unsigned long seed = 7;
};

struct MinkowskiEstimate {
  std::vector<double> s, volume;
  double slope = 0.0;
  double constant = 0.0;  // volume ~ constant * s^slope
  bool empty = false;
};

/// Volume of B_s(points) within B_r0(center) for each s, from Monte Carlo points in the s-cells
/// adjacent to the sample; log-log least-squares fit.
MinkowskiEstimate minkowski_content(const std::vector<Vec> &points, double pitch, const std::vector<double> &s_list,
                                   const Vec &center, double r0, const AmbientConfig &cfg,
                                   const MinkowskiOptions &opts = {});
MinkowskiEstimate minkowski_content(const SingularSample &sample, const std::vector<double> &s_list,
                                   const AmbientConfig &cfg, const MinkowskiOptions &opts = {});

struct PlaneSearchOptions {
  int cap_candidates = 2000;
  int keep_caps = 8;
  int equator_candidates = 2000;
  int refine_steps = 300;
  unsigned long seed = 11;
};

struct AvoidingPlane {
  bool success = false;
  Mat basis;  // n x 2, orthonormal
  double margin = 0.0;
  Vec cap_point;
};

/// min over F of dist(f, V) for the 2-plane spanned by the orthonormal columns of V.
double plane_margin(const std::vector<Vec> &F, const Mat &V);

/// Two-stage search for V in G(n, 2) with min dist(F, V) >= delta: a cap point Y with both Y and -Y
/// far from F, then V = span(Y, W) for W on the equator of Y, then a local refinement.
AvoidingPlane find_avoiding_2plane(const std::vector<Vec> &F, double delta, const PlaneSearchOptions &opts = {});

struct ConeOptions {
  int net_size = 10000;
  int net_points = 2000;    // subsample of directions used on the net
  int refine_steps = 400;
  double outlier_fraction = 0.0;
  unsigned long seed = 13;
};

struct ConeFit {
  Vec vertex;
  Mat V;  // n x (n - 2), orthonormal
  Mat W;  // n x 2, the orthogonal complement
  double alpha = 1.0;
  std::vector<int> outliers;
};

/// Smallest aperture alpha with every (non-outlier) point in X(vertex, V, alpha), V = W^perp.
ConeFit cone_fit(const std::vector<Vec> &points, const Vec &vertex, const AmbientConfig &cfg,
                 const ConeOptions &opts = {});

/// Points of the sample on the unit sphere around `vertex`, projected radially.
std::vector<Vec> sphere_trace(const std::vector<Vec> &points, const Vec &vertex, double r_min = 0.0);

}  // namespace cofreq
