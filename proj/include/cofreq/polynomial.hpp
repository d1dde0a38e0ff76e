#pragma once

#include <map>
#include <string>
#include <vector>

#include "cofreq/ambient.hpp"

namespace cofreq {

using Exponent = std::vector<int>;

/// Sparse multivariate polynomial with real coefficients.
class Polynomial {
 public:
  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int i);
  static Polynomial monomial(const Exponent &e, double c = 1.0);

  int nvars() const { return nvars_; }
  /// Largest total degree present; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  bool is_homogeneous() const;
  const std::map<Exponent, double> &terms() const { return terms_; }

  void add_term(const Exponent &e, double c);
  double coefficient(const Exponent &e) const;

  double operator()(const Vec &p) const;
  Vec gradient(const Vec &p) const;
  Mat hessian(const Vec &p) const;

  Polynomial derivative(int i) const;
  Polynomial laplacian() const;
  /// Drop coefficients with |c| <= tol * max |c|.
  Polynomial pruned(double tol = 1e-14) const;
  double max_abs_coefficient() const;

  Polynomial operator+(const Polynomial &o) const;
  Polynomial operator-(const Polynomial &o) const;
  Polynomial operator*(const Polynomial &o) const;
  Polynomial operator*(double s) const;
  Polynomial &operator+=(const Polynomial &o);

  /// Substitute x_i -> coefficients of a linear map: result(y) = P(L y).
  Polynomial compose_linear(const Mat &L) const;

  std::string to_string(const std::vector<std::string> &names = {}) const;

 private:
  int nvars_;
  std::map<Exponent, double> terms_;
};

inline Polynomial operator*(double s, const Polynomial &p) { return p * s; }

/// Exponents of all degree-k monomials in nvars variables, lexicographically
/// descending (x1^k first).
std::vector<Exponent> monomials_of_degree(int nvars, int k);

/// Exact integral of t^alpha over the unit sphere S^{m-1}.
double sphere_monomial_integral(const Exponent &alpha);

/// Exact L^2(S^{m-1}) inner product of two polynomials.
double sphere_inner(const Polynomial &a, const Polynomial &b);

/// Flat, cache-friendly form of a polynomial for repeated evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial &p);

  int nvars() const { return nvars_; }
  int degree() const { return maxdeg_; }
  bool is_zero() const { return coef_.empty(); }

  double value(const double *p) const;
  /// Value, gradient (size nvars) and optionally Hessian (nvars x nvars, row-major).
  void eval(const double *p, double &v, double *grad, double *hess) const;

 private:
  int nvars_ = 0;
  int maxdeg_ = 0;
  std::vector<double> coef_;
  std::vector<int> exps_;  // nterms x nvars
};

}  // namespace cofreq
