#include "cofreq/harmonics.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace cofreq {

namespace {

long binom(long a, long b) {
  if (b < 0 || a < 0 || b > a) return 0;
  long r = 1;
  for (long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

// Laplacian as a matrix from degree-j to degree-(j-2) monomial coefficients.
Mat laplacian_matrix(int m, int j, const std::vector<Exponent> &hi) {
  const auto lo = monomials_of_degree(m, j - 2);
  std::map<Exponent, int> index;
  for (size_t i = 0; i < lo.size(); ++i) index[lo[i]] = static_cast<int>(i);
  Mat L = Mat::Zero(static_cast<long>(lo.size()), static_cast<long>(hi.size()));
  for (size_t c = 0; c < hi.size(); ++c)
    for (int i = 0; i < m; ++i) {
      if (hi[c][i] < 2) continue;
      Exponent e = hi[c];
      e[i] -= 2;
      L(index.at(e), static_cast<long>(c)) += hi[c][i] * (hi[c][i] - 1);
    }
  return L;
}

// Nullspace basis from reduced row echelon form; one vector per free column,
// free columns taken in monomial order.
Mat rref_nullspace(Mat A) {
  const long rows = A.rows(), cols = A.cols();
  std::vector<long> pivots;
  long r = 0;
  for (long c = 0; c < cols && r < rows; ++c) {
    long best = r;
    for (long i = r + 1; i < rows; ++i)
      if (std::abs(A(i, c)) > std::abs(A(best, c))) best = i;
    if (std::abs(A(best, c)) < 1e-10) continue;
    A.row(r).swap(A.row(best));
    A.row(r) /= A(r, c);
    for (long i = 0; i < rows; ++i)
      if (i != r && A(i, c) != 0.0) A.row(i) -= A(i, c) * A.row(r);
    pivots.push_back(c);
    ++r;
  }
  std::vector<bool> is_pivot(cols, false);
  for (long c : pivots) is_pivot[c] = true;
  std::vector<long> free;
  for (long c = 0; c < cols; ++c)
    if (!is_pivot[c]) free.push_back(c);
  Mat N = Mat::Zero(cols, static_cast<long>(free.size()));
  for (size_t k = 0; k < free.size(); ++k) {
    N(free[k], static_cast<long>(k)) = 1.0;
    for (size_t p = 0; p < pivots.size(); ++p) N(pivots[p], static_cast<long>(k)) = -A(static_cast<long>(p), free[k]);
  }
  return N;
}

Polynomial poly_from_coeffs(const std::vector<Exponent> &mons, const Vec &c, int m) {
  Polynomial p(m);
  for (size_t i = 0; i < mons.size(); ++i)
    if (c(static_cast<long>(i)) != 0.0) p.add_term(mons[i], c(static_cast<long>(i)));
  return p;
}

}  // namespace

long eigenvalue(int j, int m) {
  if (j < 0 || m < 2) throw std::invalid_argument("eigenvalue needs j >= 0 and m >= 2");
  return static_cast<long>(j) * (j + m - 2);
}

long harmonic_dimension(int m, int j) { return binom(m + j - 1, j) - binom(m + j - 3, j - 2); }

int laplacian_nullspace_dimension(int m, int j) {
  const auto mons = monomials_of_degree(m, j);
  if (j < 2) return static_cast<int>(mons.size());
  const Mat L = laplacian_matrix(m, j, mons);
  Eigen::FullPivLU<Mat> lu(L);
  lu.setThreshold(1e-10);
  return static_cast<int>(mons.size()) - static_cast<int>(lu.rank());
}

SphereRule exact_sphere_rule(int m, int degree) {
  QuadratureOptions o;
  const int k = std::max(1, degree / 2 + 1);
  o.s1_nodes = std::max(8, degree + 2);
  o.s2_lat = std::max(4, k + 1);
  o.s3_lat = std::max(4, degree / 2 + 2);
  o.theta_nodes = m >= 5 ? 2 * degree + 24 : std::max(8, k + 2);
  return sphere_rule(m, o);
}

double SphericalHarmonic::evaluate(const Vec &omega) const {
  if (omega.size() != m) throw std::invalid_argument("harmonic evaluated at a point of wrong dimension");
  if (std::abs(omega.norm() - 1.0) > 1e-12) throw std::invalid_argument("harmonic evaluated off the unit sphere");
  return poly(omega);
}

Vec SphericalHarmonic::gradient_sphere(const Vec &omega) const {
  if (omega.size() != m) throw std::invalid_argument("harmonic evaluated at a point of wrong dimension");
  if (std::abs(omega.norm() - 1.0) > 1e-12) throw std::invalid_argument("harmonic evaluated off the unit sphere");
  const Vec g = poly.gradient(omega);
  return g - g.dot(omega) * omega;
}

std::vector<SphericalHarmonic> harmonic_basis(int j, int m) {
  if (m < 2 || m > 5) throw std::invalid_argument("harmonic_basis supports m in {2,...,5} (got m=" + std::to_string(m) + ")");
  if (j < 0) throw std::invalid_argument("harmonic degree must be nonnegative");

  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<SphericalHarmonic>> cache;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find({j, m});
    if (it != cache.end()) return it->second;
  }

  const auto mons = monomials_of_degree(m, j);
  Mat N;
  if (j < 2) {
    N = Mat::Identity(static_cast<long>(mons.size()), static_cast<long>(mons.size()));
  } else {
    N = rref_nullspace(laplacian_matrix(m, j, mons));
  }

  // Values of the monomials on the sphere rule.
  const SphereRule rule = exact_sphere_rule(m, 2 * j);
  Mat V(rule.size(), static_cast<long>(mons.size()));
  for (size_t c = 0; c < mons.size(); ++c) {
    const Polynomial mono = Polynomial::monomial(mons[c]);
    for (int i = 0; i < rule.size(); ++i) V(i, static_cast<long>(c)) = mono(rule.nodes.col(i));
  }
  const Vec &w = rule.weights;
  // Gram-Schmidt on sampled values, carrying the coefficient vectors along.
  Mat vals = V * N;
  Mat coef = N;
  std::vector<Vec> basis;
  for (long k = 0; k < N.cols(); ++k) {
    for (int pass = 0; pass < 2; ++pass)
      for (long q = 0; q < k; ++q) {
        const double proj = (vals.col(k).array() * vals.col(q).array() * w.array()).sum();
        vals.col(k) -= proj * vals.col(q);
        coef.col(k) -= proj * coef.col(q);
      }
    const double nrm = std::sqrt((vals.col(k).array().square() * w.array()).sum());
    if (nrm < 1e-12) throw std::runtime_error("harmonic nullspace basis is degenerate");
    vals.col(k) /= nrm;
    coef.col(k) /= nrm;
    basis.push_back(coef.col(k));
  }

  std::vector<SphericalHarmonic> out;
  for (const Vec &c : basis) {
    SphericalHarmonic h;
    h.degree = j;
    h.m = m;
    h.coeffs = c;
    h.poly = poly_from_coeffs(mons, c, m);
    out.push_back(std::move(h));
  }
  std::lock_guard<std::mutex> lk(mu);
  cache.emplace(std::make_pair(j, m), out);
  return out;
}

SphericalHarmonic harmonic_from_polynomial(const Polynomial &p) {
  if (p.is_zero()) throw std::invalid_argument("zero polynomial is not a harmonic");
  if (!p.is_homogeneous()) throw std::invalid_argument("harmonic must be homogeneous");
  if (!p.laplacian().pruned(1e-12).is_zero() && p.laplacian().max_abs_coefficient() > 1e-10 * p.max_abs_coefficient())
    throw std::invalid_argument("polynomial is not harmonic");
  SphericalHarmonic h;
  h.degree = p.degree();
  h.m = p.nvars();
  h.poly = p * (1.0 / std::sqrt(sphere_inner(p, p)));
  const auto mons = monomials_of_degree(h.m, h.degree);
  if (mons.size() < 200000) {
    h.coeffs = Vec::Zero(static_cast<long>(mons.size()));
    for (size_t i = 0; i < mons.size(); ++i) h.coeffs(static_cast<long>(i)) = h.poly.coefficient(mons[i]);
  }
  return h;
}

}  // namespace cofreq
