#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cofreq/ambient.hpp"
#include "cofreq/polynomial.hpp"

namespace cofreq {

/// Scalar field on R^n with gradient and Hessian. The defaults use central differences.
class Field {
 public:
  virtual ~Field() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec &X) const = 0;
  virtual Vec gradient(const Vec &X) const;
  virtual Mat hessian(const Vec &X) const;
  /// Value and gradient together; exact fields override this for speed.
  virtual void value_gradient(const Vec &X, double &v, Vec &g) const {
    v = value(X);
    g = gradient(X);
  }

  double fd_step = 1e-5;
};

/// Wraps a closure; derivatives by central differences.
class FunctionField : public Field {
 public:
  FunctionField(int n, std::function<double(const Vec &)> f) : n_(n), f_(std::move(f)) {}
  int dim() const override { return n_; }
  double value(const Vec &X) const override { return f_(X); }

 private:
  int n_;
  std::function<double(const Vec &)> f_;
};

/// c * b(x) * P(t) * |t|^q.
struct Term {
  double c = 1.0;
  Polynomial bx;  // in d variables
  Polynomial pt;  // in m variables
  double q = 0.0;
};

/// Finite sum of terms c b(x) P(t) |t|^q with exact derivatives.
class TermField : public Field {
 public:
  TermField() = default;
  TermField(int d, int m) : d_(d), m_(m) {}

  int dim() const override { return d_ + m_; }
  int d() const { return d_; }
  int m() const { return m_; }

  void add(const Term &t);
  void add(const TermField &other, double scale = 1.0);
  const std::vector<Term> &terms() const { return terms_; }

  double value(const Vec &X) const override;
  /// Throws SingularPointError at t = 0 when some |t| power is not an even integer.
  Vec gradient(const Vec &X) const override;
  Mat hessian(const Vec &X) const override;
  void value_gradient(const Vec &X, double &v, Vec &g) const override;

 private:
  struct Compiled {
    double c;
    CompiledPolynomial bx, pt;
    double q;
    bool smooth;  // q is a nonnegative even integer
  };
  void eval(const Vec &X, double *v, Vec *g, Mat *H) const;

  int d_ = 0, m_ = 0;
  std::vector<Term> terms_;
  std::vector<Compiled> compiled_;
};

/// Cylindrical residual Delta_x u + d_r^2 u + r^{-2} Delta_S u, computed as
/// Delta u - (m-1) (t . grad_t u) / |t|^2 from the field's Hessian.
double pde_residual(const Field &u, const Vec &X, const AmbientConfig &cfg);

}  // namespace cofreq
