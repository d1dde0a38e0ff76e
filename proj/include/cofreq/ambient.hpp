#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace cofreq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class SingularPointError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimension pair (n, d) of R^n minus R^d; m = n - d is the codimension.
struct AmbientConfig {
  int n = 4;
  int d = 2;

  AmbientConfig() = default;
  AmbientConfig(int n_, int d_);
  /// No range checks; used for the codimension-one test mode d = n - 1.
  static AmbientConfig unchecked(int n_, int d_) {
    AmbientConfig c;
    c.n = n_;
    c.d = d_;
    return c;
  }

  int m() const { return n - d; }

  /// Throws unless 3 <= n <= 6 and 1 <= d <= n-2.
  void validate() const;
  /// Same checks without the upper bound on n, for pointwise-only work.
  void validate_relaxed() const;
};

/// X = (x, t) with x in R^d, t in R^m.
struct SplitPoint {
  Vec x;
  Vec t;

  SplitPoint() = default;
  SplitPoint(Vec x_, Vec t_) : x(std::move(x_)), t(std::move(t_)) {}
  static SplitPoint split(const Vec &X, const AmbientConfig &cfg);

  Vec joined() const;
  double delta() const { return t.norm(); }
};

inline double delta(const Vec &X, const AmbientConfig &cfg) {
  return X.tail(cfg.m()).norm();
}

/// w(X) = |t|^{-(n-d-1)}.
double weight(const Vec &X, const AmbientConfig &cfg);
double weight(const SplitPoint &X, const AmbientConfig &cfg);

/// E_r(Y0) = A0^{1/2} B_r + Y0.
struct Ellipsoid {
  Vec center;
  Mat matrix_root;
  double radius = 1.0;

  Ellipsoid(Vec center_, Mat root, double r);
  static Ellipsoid ball(Vec center_, double r);

  bool is_round() const;
  /// True when the root has no x-t coupling, so R^d maps to itself.
  bool preserves_split(int d) const;
};

/// X(Y, V, alpha) = {Z : dist(Z - Y, V) < alpha |Z - Y|}.
struct Cone {
  Vec vertex;
  Mat plane;  // n x k, orthonormal columns
  double aperture = 0.5;

  Cone(Vec vertex_, Mat plane_, double alpha);
};

/// The vertex itself counts as inside.
bool cone_contains(const Cone &c, const Vec &Z);

/// Distance from v to span(plane) for a plane with orthonormal columns.
double dist_to_plane(const Mat &plane, const Vec &v);

/// Orthonormalize the columns of M (modified Gram-Schmidt, two passes).
Mat orthonormalize_columns(const Mat &M);

/// Orthonormal basis of span(V)^perp.
Mat orthogonal_complement(const Mat &V);

}  // namespace cofreq
