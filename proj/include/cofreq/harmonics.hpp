#pragma once

#include <vector>

#include "cofreq/polynomial.hpp"
#include "cofreq/quadrature.hpp"

namespace cofreq {

/// lambda_j = j (j + m - 2).
long eigenvalue(int j, int m);

/// C(m+j-1, j) - C(m+j-3, j-2).
long harmonic_dimension(int m, int j);

/// Dimension of the kernel of the Laplacian on degree-j polynomials in m variables,
/// by direct rank computation.
int laplacian_nullspace_dimension(int m, int j);

/// Real spherical harmonic of degree j on S^{m-1}, stored as a harmonic
/// homogeneous polynomial in m variables.
struct SphericalHarmonic {
  int degree = 0;
  int m = 2;
  Polynomial poly;
  Vec coeffs;  // over monomials_of_degree(m, degree)

  /// Throws unless |omega| = 1 within 1e-12.
  double evaluate(const Vec &omega) const;
  /// Tangential gradient on S^{m-1}.
  Vec gradient_sphere(const Vec &omega) const;
};

/// Orthonormal basis of degree-j harmonics on S^{m-1}, m in {2,...,5}. The nullspace
/// basis follows lexicographic monomial order; orthonormalization uses a sphere rule
/// exact in degree 2j, with one re-orthogonalization pass.
std::vector<SphericalHarmonic> harmonic_basis(int j, int m);

/// Wrap an arbitrary harmonic homogeneous polynomial, normalized to unit L^2(S^{m-1}).
SphericalHarmonic harmonic_from_polynomial(const Polynomial &p);

/// Sphere rule on S^{m-1} exact for polynomials up to the given degree.
SphereRule exact_sphere_rule(int m, int degree);

}  // namespace cofreq
