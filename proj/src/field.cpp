#include "cofreq/field.hpp"

#include <cmath>

namespace cofreq {

Vec Field::gradient(const Vec &X) const {
  const int n = dim();
  Vec g(n);
  Vec Y = X;
  for (int i = 0; i < n; ++i) {
    const double h = fd_step * std::max(1.0, std::abs(X(i)));
    Y(i) = X(i) + h;
    const double fp = value(Y);
    Y(i) = X(i) - h;
    const double fm = value(Y);
    Y(i) = X(i);
    g(i) = (fp - fm) / (2 * h);
  }
  return g;
}

Mat Field::hessian(const Vec &X) const {
  const int n = dim();
  Mat H(n, n);
  const double h = std::cbrt(1e-16) * 10;  // about 5e-5, balances truncation and rounding
  Vec Y = X;
  const double f0 = value(X);
  for (int i = 0; i < n; ++i) {
    Y(i) = X(i) + h;
    const double fp = value(Y);
    Y(i) = X(i) - h;
    const double fm = value(Y);
    Y(i) = X(i);
    H(i, i) = (fp - 2 * f0 + fm) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          Y(i) = X(i) + a * h;
          Y(j) = X(j) + b * h;
          s += a * b * value(Y);
        }
      Y(i) = X(i);
      Y(j) = X(j);
      H(i, j) = H(j, i) = s / (4 * h * h);
    }
  }
  return H;
}

void TermField::add(const Term &t) {
  if (t.bx.nvars() != d_ || t.pt.nvars() != m_) throw std::invalid_argument("term has wrong variable counts");
  if (t.c == 0.0 || t.bx.is_zero() || t.pt.is_zero()) return;
  terms_.push_back(t);
  const double qr = std::round(t.q);
  const bool smooth = std::abs(t.q - qr) < 1e-12 && qr >= 0 && static_cast<long>(qr) % 2 == 0;
  compiled_.push_back({t.c, CompiledPolynomial(t.bx), CompiledPolynomial(t.pt), t.q, smooth});
}

void TermField::add(const TermField &other, double scale) {
  if (other.d_ != d_ || other.m_ != m_) throw std::invalid_argument("fields have different dimensions");
  for (Term t : other.terms_) {
    t.c *= scale;
    add(t);
  }
}

void TermField::eval(const Vec &X, double *v, Vec *g, Mat *H) const {
  if (X.size() != d_ + m_) throw std::invalid_argument("field evaluated at a point of wrong dimension");
  const double *x = X.data();
  const double *t = X.data() + d_;
  const double r2 = X.tail(m_).squaredNorm();
  const double r = std::sqrt(r2);
  const int n = d_ + m_;
  if (v) *v = 0.0;
  if (g) g->setZero(n);
  if (H) H->setZero(n, n);
  double gb[16], hb[256], gp[16], hp[256];
  for (const Compiled &c : compiled_) {
    if ((g || H) && r == 0.0 && !c.smooth)
      throw SingularPointError("gradient undefined at t = 0 for a non-smooth power of |t|");
    double bv, pv;
    c.bx.eval(x, bv, (g || H) ? gb : nullptr, H ? hb : nullptr);
    c.pt.eval(t, pv, (g || H) ? gp : nullptr, H ? hp : nullptr);
    const double rq = c.q == 0.0 ? 1.0 : std::pow(r, c.q);
    if (v) *v += c.c * bv * pv * rq;
    if (!g && !H) continue;
    // T(t) = P(t) r^q; dT = dP r^q + P q r^{q-2} t
    const double rq2 = c.q == 0.0 ? 0.0 : c.q * std::pow(r, c.q - 2);
    double gT[16];
    const double T = pv * rq;
    for (int a = 0; a < m_; ++a) gT[a] = gp[a] * rq + pv * rq2 * t[a];
    if (g) {
      for (int i = 0; i < d_; ++i) (*g)(i) += c.c * gb[i] * T;
      for (int a = 0; a < m_; ++a) (*g)(d_ + a) += c.c * bv * gT[a];
    }
    if (H) {
      // H(r^q) = q r^{q-2} I + q (q-2) r^{q-4} t t^T
      const double rq4 = (c.q == 0.0 || c.q == 2.0) ? 0.0 : c.q * (c.q - 2) * std::pow(r, c.q - 4);
      for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) (*H)(i, j) += c.c * hb[i * d_ + j] * T;
      for (int i = 0; i < d_; ++i)
        for (int a = 0; a < m_; ++a) {
          const double val = c.c * gb[i] * gT[a];
          (*H)(i, d_ + a) += val;
          (*H)(d_ + a, i) += val;
        }
      for (int a = 0; a < m_; ++a)
        for (int b = 0; b < m_; ++b) {
          double hT = hp[a * m_ + b] * rq + gp[a] * rq2 * t[b] + gp[b] * rq2 * t[a] + pv * rq4 * t[a] * t[b];
          if (a == b) hT += pv * rq2;
          (*H)(d_ + a, d_ + b) += c.c * bv * hT;
        }
    }
  }
}

double TermField::value(const Vec &X) const {
  double v;
  eval(X, &v, nullptr, nullptr);
  return v;
}

Vec TermField::gradient(const Vec &X) const {
  Vec g;
  eval(X, nullptr, &g, nullptr);
  return g;
}

Mat TermField::hessian(const Vec &X) const {
  Mat H;
  eval(X, nullptr, nullptr, &H);
  return H;
}

void TermField::value_gradient(const Vec &X, double &v, Vec &g) const { eval(X, &v, &g, nullptr); }

double pde_residual(const Field &u, const Vec &X, const AmbientConfig &cfg) {
  const int m = cfg.m();
  const Vec t = X.tail(m);
  const double r2 = t.squaredNorm();
  if (r2 == 0.0) throw SingularPointError("pde_residual is undefined on R^d");
  const Mat H = u.hessian(X);
  const Vec g = u.gradient(X);
  return H.trace() - (m - 1) * t.dot(g.tail(m)) / r2;
}

}  // namespace cofreq
