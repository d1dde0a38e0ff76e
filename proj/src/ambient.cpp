#include "cofreq/ambient.hpp"

#include <cmath>

namespace cofreq {

AmbientConfig::AmbientConfig(int n_, int d_) : n(n_), d(d_) { validate_relaxed(); }

void AmbientConfig::validate_relaxed() const {
  if (n < 3) throw std::invalid_argument("ambient dimension n must be at least 3");
  if (d < 1 || d > n - 2)
    throw std::invalid_argument("boundary dimension d must satisfy 1 <= d <= n-2 (got n=" +
                                std::to_string(n) + ", d=" + std::to_string(d) + ")");
}

void AmbientConfig::validate() const {
  validate_relaxed();
  if (n > 6) throw std::invalid_argument("ambient dimension n must be at most 6");
}

SplitPoint SplitPoint::split(const Vec &X, const AmbientConfig &cfg) {
  if (X.size() != cfg.n) throw std::invalid_argument("point has wrong dimension");
  return {X.head(cfg.d), X.tail(cfg.m())};
}

Vec SplitPoint::joined() const {
  Vec X(x.size() + t.size());
  X << x, t;
  return X;
}

double weight(const Vec &X, const AmbientConfig &cfg) {
  double r = delta(X, cfg);
  if (r == 0.0) throw SingularPointError("weight is singular on R^d (|t| = 0)");
  return std::pow(r, -(cfg.m() - 1));
}

double weight(const SplitPoint &X, const AmbientConfig &cfg) {
  double r = X.delta();
  if (r == 0.0) throw SingularPointError("weight is singular on R^d (|t| = 0)");
  return std::pow(r, -(cfg.m() - 1));
}

Ellipsoid::Ellipsoid(Vec center_, Mat root, double r)
    : center(std::move(center_)), matrix_root(std::move(root)), radius(r) {
  const auto n = center.size();
  if (matrix_root.rows() != n || matrix_root.cols() != n)
    throw std::invalid_argument("ellipsoid matrix root has wrong shape");
  if (!(radius > 0)) throw std::invalid_argument("ellipsoid radius must be positive");
  if ((matrix_root - matrix_root.transpose()).norm() > 1e-12 * (1 + matrix_root.norm()))
    throw std::invalid_argument("ellipsoid matrix root must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(matrix_root);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument("ellipsoid matrix root must be positive definite");
}

Ellipsoid Ellipsoid::ball(Vec center_, double r) {
  const auto n = center_.size();
  return Ellipsoid(std::move(center_), Mat::Identity(n, n), r);
}

bool Ellipsoid::is_round() const {
  const auto n = center.size();
  return (matrix_root - Mat::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0;
}

bool Ellipsoid::preserves_split(int d) const {
  const auto n = center.size();
  const auto m = n - d;
  return matrix_root.topRightCorner(d, m).cwiseAbs().maxCoeff() == 0.0 &&
         matrix_root.bottomLeftCorner(m, d).cwiseAbs().maxCoeff() == 0.0;
}

Cone::Cone(Vec vertex_, Mat plane_, double alpha)
    : vertex(std::move(vertex_)), plane(std::move(plane_)), aperture(alpha) {
  if (plane.rows() != vertex.size()) throw std::invalid_argument("cone plane has wrong dimension");
  const Mat G = plane.transpose() * plane;
  if ((G - Mat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("cone plane basis must be orthonormal");
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("cone aperture must lie in (0,1)");
}

double dist_to_plane(const Mat &plane, const Vec &v) {
  const Vec proj = plane * (plane.transpose() * v);
  return (v - proj).norm();
}

bool cone_contains(const Cone &c, const Vec &Z) {
  const Vec v = Z - c.vertex;
  const double len = v.norm();
  if (len == 0.0) return true;
  return dist_to_plane(c.plane, v) < c.aperture * len;
}

Mat orthonormalize_columns(const Mat &M) {
  Mat Q = M;
  for (int j = 0; j < Q.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
    const double nrm = Q.col(j).norm();
    if (nrm < 1e-14) throw std::invalid_argument("columns are linearly dependent");
    Q.col(j) /= nrm;
  }
  return Q;
}

Mat orthogonal_complement(const Mat &V) {
  const auto n = V.rows();
  Eigen::JacobiSVD<Mat> svd(V, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(n - V.cols());
}

}  // namespace cofreq
