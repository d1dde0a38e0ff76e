#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cofreq/ambient.hpp"

namespace cofreq {

using ScalarField = std::function<double(const Vec &)>;

struct QuadratureOptions {
  int theta_nodes = 64;   // Gauss-Legendre nodes in the split angle
  int s1_nodes = 64;      // trapezoid nodes per S^1 factor
  int s2_lat = 12;        // S^2 tensor rule: lat GL nodes x 2*lat azimuths (288 nodes)
  int s3_lat = 8;         // S^3 Hopf rule: lat GL nodes x (2*lat)^2 circle nodes
  int radial_nodes = 32;  // Gauss-Legendre nodes in the radius for ball integrals
  double rel_tol = 1e-6;

  /// Same rule with every angular size scaled by `f` (at least 2 nodes each).
  QuadratureOptions scaled(double f) const;
};

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int k, double a, double b, Vec &nodes, Vec &weights);

/// Rule on the unit sphere S^{k-1} in R^k; weights sum to |S^{k-1}|.
struct SphereRule {
  Mat nodes;  // k x N
  Vec weights;
  int size() const { return static_cast<int>(weights.size()); }
};

SphereRule sphere_rule(int k, const QuadratureOptions &opts);

/// |S^{k-1}| = 2 pi^{k/2} / Gamma(k/2).
double sphere_area(int k);

enum class DomainTag { BallBulk, Sphere, EllipsoidBoundary };

/// Nodes and positive weights for a weighted integral.
struct QuadratureRule {
  Mat nodes;  // n x N
  Vec weights;
  DomainTag tag = DomainTag::Sphere;
  int size() const { return static_cast<int>(weights.size()); }
};

/// The unit sphere split as (theta, xi, eta) in [0, pi/2] x S^{d-1} x S^{m-1},
/// point (cos(theta) xi, sin(theta) eta), weight cos^{d-1}(theta) dtheta dxi deta.
/// These weights integrate against d sigma_w, so the singular factor never appears.
class SplitSphereRule {
 public:
  SplitSphereRule(const AmbientConfig &cfg, const QuadratureOptions &opts);

  const Mat &nodes() const { return nodes_; }
  const Vec &weights() const { return weights_; }
  /// |t| of each unit node, i.e. sin(theta).
  const Vec &sin_theta() const { return sin_theta_; }
  int size() const { return static_cast<int>(weights_.size()); }
  const AmbientConfig &config() const { return cfg_; }

  /// Rule for the sphere of radius rho about a center on R^d.
  QuadratureRule scaled(const Vec &center, double rho) const;

 private:
  AmbientConfig cfg_;
  Mat nodes_;
  Vec weights_;
  Vec sin_theta_;
};

struct BoundaryQuadratureReport {
  double value = 0.0;
  double coarse_value = 0.0;   // same integral at half angular resolution
  double refinement_ratio = 1.0;
  double equator_residual = 0.0;  // max |f| on the ring of nodes nearest R^d
  bool split_chart = true;
  bool converged = true;
  std::string diagnostics;
};

/// Integral of f dm over B_r(center), center on R^d.
double bulk_quadrature_dm(const Vec &center, double r, const ScalarField &f, const AmbientConfig &cfg,
                          const QuadratureOptions &opts = {});

/// Integral of f w dY over an ellipsoid E (center on R^d, or E away from R^d).
double bulk_quadrature_dm(const Ellipsoid &E, const ScalarField &f, const AmbientConfig &cfg,
                          const QuadratureOptions &opts = {});

/// Integral over dE of f w r/|A0^{-1}(Y - Y0)| d sigma(Y); for a round sphere this is
/// the integral of f d sigma_w.
double boundary_quadrature_sigma_w(const Ellipsoid &E, const ScalarField &f, const AmbientConfig &cfg,
                                   const QuadratureOptions &opts = {});

/// Same integral with refinement and equator diagnostics. Throws when the integrand
/// does not vanish on R^d and the refinement ratio fails to settle within rel_tol.
BoundaryQuadratureReport boundary_quadrature_report(const Ellipsoid &E, const ScalarField &f,
                                                    const AmbientConfig &cfg,
                                                    const QuadratureOptions &opts = {});

/// Assembled rule for dE, nodes in R^n and weights including w and the geometric factor.
QuadratureRule boundary_rule(const Ellipsoid &E, const AmbientConfig &cfg, const QuadratureOptions &opts);

/// Assembled rule for the ellipsoid interior against dm.
QuadratureRule bulk_rule(const Ellipsoid &E, const AmbientConfig &cfg, const QuadratureOptions &opts);

/// Sum of w_i f(node_i); throws naming the node if f is not finite there.
double apply_rule(const QuadratureRule &rule, const ScalarField &f);

}  // namespace cofreq
