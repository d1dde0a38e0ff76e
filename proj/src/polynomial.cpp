#include "cofreq/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cofreq {

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Exponent(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  Exponent e(nvars, 0);
  e.at(i) = 1;
  return monomial(e);
}

Polynomial Polynomial::monomial(const Exponent &e, double c) {
  Polynomial p(static_cast<int>(e.size()));
  p.add_term(e, c);
  return p;
}

int Polynomial::degree() const {
  int deg = -1;
  for (const auto &[e, c] : terms_) {
    int s = 0;
    for (int k : e) s += k;
    deg = std::max(deg, s);
  }
  return deg;
}

bool Polynomial::is_homogeneous() const {
  const int deg = degree();
  for (const auto &[e, c] : terms_) {
    int s = 0;
    for (int k : e) s += k;
    if (s != deg) return false;
  }
  return true;
}

void Polynomial::add_term(const Exponent &e, double c) {
  if (static_cast<int>(e.size()) != nvars_) throw std::invalid_argument("exponent has wrong length");
  for (int k : e)
    if (k < 0) throw std::invalid_argument("negative exponent");
  if (c == 0.0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::coefficient(const Exponent &e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::operator()(const Vec &p) const {
  if (p.size() != nvars_) throw std::invalid_argument("polynomial evaluated at a point of wrong dimension");
  double acc = 0.0;
  for (const auto &[e, c] : terms_) {
    double v = c;
    for (int i = 0; i < nvars_; ++i)
      if (e[i]) v *= std::pow(p(i), e[i]);
    acc += v;
  }
  return acc;
}

Vec Polynomial::gradient(const Vec &p) const {
  Vec g(nvars_);
  for (int i = 0; i < nvars_; ++i) g(i) = derivative(i)(p);
  return g;
}

Mat Polynomial::hessian(const Vec &p) const {
  Mat H(nvars_, nvars_);
  for (int i = 0; i < nvars_; ++i) {
    const Polynomial di = derivative(i);
    for (int j = i; j < nvars_; ++j) H(i, j) = H(j, i) = di.derivative(j)(p);
  }
  return H;
}

Polynomial Polynomial::derivative(int i) const {
  Polynomial out(nvars_);
  for (const auto &[e, c] : terms_) {
    if (e[i] == 0) continue;
    Exponent f = e;
    f[i] -= 1;
    out.add_term(f, c * e[i]);
  }
  return out;
}

Polynomial Polynomial::laplacian() const {
  Polynomial out(nvars_);
  for (const auto &[e, c] : terms_)
    for (int i = 0; i < nvars_; ++i) {
      if (e[i] < 2) continue;
      Exponent f = e;
      f[i] -= 2;
      out.add_term(f, c * e[i] * (e[i] - 1));
    }
  return out;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto &[e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Polynomial Polynomial::pruned(double tol) const {
  const double cut = tol * max_abs_coefficient();
  Polynomial out(nvars_);
  for (const auto &[e, c] : terms_)
    if (std::abs(c) > cut) out.terms_.emplace(e, c);
  return out;
}

Polynomial Polynomial::operator+(const Polynomial &o) const {
  Polynomial out = *this;
  out += o;
  return out;
}

Polynomial &Polynomial::operator+=(const Polynomial &o) {
  if (o.nvars_ != nvars_) throw std::invalid_argument("polynomials have different variable counts");
  for (const auto &[e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial Polynomial::operator-(const Polynomial &o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(double s) const {
  Polynomial out(nvars_);
  if (s == 0.0) return out;
  for (const auto &[e, c] : terms_) out.terms_.emplace(e, c * s);
  return out;
}

Polynomial Polynomial::operator*(const Polynomial &o) const {
  if (o.nvars_ != nvars_) throw std::invalid_argument("polynomials have different variable counts");
  Polynomial out(nvars_);
  for (const auto &[e1, c1] : terms_)
    for (const auto &[e2, c2] : o.terms_) {
      Exponent e(nvars_);
      for (int i = 0; i < nvars_; ++i) e[i] = e1[i] + e2[i];
      out.add_term(e, c1 * c2);
    }
  return out;
}

Polynomial Polynomial::compose_linear(const Mat &L) const {
  if (L.rows() != nvars_) throw std::invalid_argument("linear map has wrong shape");
  const int k = static_cast<int>(L.cols());
  std::vector<Polynomial> lin;
  for (int i = 0; i < nvars_; ++i) {
    Polynomial li(k);
    for (int j = 0; j < k; ++j) li += Polynomial::variable(k, j) * L(i, j);
    lin.push_back(li);
  }
  Polynomial out(k);
  for (const auto &[e, c] : terms_) {
    Polynomial term = Polynomial::constant(k, c);
    for (int i = 0; i < nvars_; ++i)
      for (int r = 0; r < e[i]; ++r) term = term * lin[i];
    out += term;
  }
  return out;
}

std::string Polynomial::to_string(const std::vector<std::string> &names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto &[e, c] = *it;
    if (!first) os << " + ";
    first = false;
    os << c;
    for (int i = 0; i < nvars_; ++i) {
      if (!e[i]) continue;
      os << "*" << (i < static_cast<int>(names.size()) ? names[i] : "v" + std::to_string(i + 1));
      if (e[i] > 1) os << "^" << e[i];
    }
  }
  return os.str();
}

std::vector<Exponent> monomials_of_degree(int nvars, int k) {
  std::vector<Exponent> out;
  if (k < 0 || nvars < 1) return out;
  Exponent e(nvars, 0);
  // recursive fill, first variable takes the largest power first
  auto rec = [&](auto &&self, int i, int left) -> void {
    if (i == nvars - 1) {
      e[i] = left;
      out.push_back(e);
      return;
    }
    for (int p = left; p >= 0; --p) {
      e[i] = p;
      self(self, i + 1, left - p);
    }
  };
  rec(rec, 0, k);
  return out;
}

double sphere_monomial_integral(const Exponent &alpha) {
  double lg = 0.0;
  int total = 0;
  for (int a : alpha) {
    if (a % 2) return 0.0;
    lg += std::lgamma(0.5 * (a + 1));
    total += a;
  }
  const int m = static_cast<int>(alpha.size());
  return 2.0 * std::exp(lg - std::lgamma(0.5 * (total + m)));
}

double sphere_inner(const Polynomial &a, const Polynomial &b) {
  if (a.nvars() != b.nvars()) throw std::invalid_argument("polynomials have different variable counts");
  double acc = 0.0;
  for (const auto &[e1, c1] : a.terms())
    for (const auto &[e2, c2] : b.terms()) {
      Exponent e(e1.size());
      for (size_t i = 0; i < e.size(); ++i) e[i] = e1[i] + e2[i];
      acc += c1 * c2 * sphere_monomial_integral(e);
    }
  return acc;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial &p) : nvars_(p.nvars()) {
  maxdeg_ = 0;
  for (const auto &[e, c] : p.terms()) {
    coef_.push_back(c);
    for (int k : e) {
      exps_.push_back(k);
      maxdeg_ = std::max(maxdeg_, k);
    }
  }
}

double CompiledPolynomial::value(const double *p) const {
  double v;
  eval(p, v, nullptr, nullptr);
  return v;
}

void CompiledPolynomial::eval(const double *p, double &v, double *grad, double *hess) const {
  const int nv = nvars_;
  const int D = maxdeg_ + 1;
  // pw[i*D + k] = p_i^k
  double pw[16 * 32];
  if (nv > 16 || D > 32) throw std::invalid_argument("polynomial too large for compiled evaluation");
  for (int i = 0; i < nv; ++i) {
    pw[i * D] = 1.0;
    for (int k = 1; k < D; ++k) pw[i * D + k] = pw[i * D + k - 1] * p[i];
  }
  v = 0.0;
  if (grad) std::fill(grad, grad + nv, 0.0);
  if (hess) std::fill(hess, hess + nv * nv, 0.0);
  const size_t nt = coef_.size();
  double f[16];
  for (size_t t = 0; t < nt; ++t) {
    const int *e = &exps_[t * nv];
    double prod = coef_[t];
    for (int i = 0; i < nv; ++i) {
      f[i] = pw[i * D + e[i]];
      prod *= f[i];
    }
    v += prod;
    if (!grad && !hess) continue;
    for (int i = 0; i < nv; ++i) {
      if (!e[i]) continue;
      // product with the i-th factor differentiated once
      double gi = coef_[t] * e[i] * pw[i * D + e[i] - 1];
      for (int k = 0; k < nv; ++k)
        if (k != i) gi *= f[k];
      if (grad) grad[i] += gi;
      if (!hess) continue;
      if (e[i] >= 2) {
        double hii = coef_[t] * e[i] * (e[i] - 1) * pw[i * D + e[i] - 2];
        for (int k = 0; k < nv; ++k)
          if (k != i) hii *= f[k];
        hess[i * nv + i] += hii;
      }
      for (int j = i + 1; j < nv; ++j) {
        if (!e[j]) continue;
        double hij = coef_[t] * e[i] * e[j] * pw[i * D + e[i] - 1] * pw[j * D + e[j] - 1];
        for (int k = 0; k < nv; ++k)
          if (k != i && k != j) hij *= f[k];
        hess[i * nv + j] += hij;
        hess[j * nv + i] += hij;
      }
    }
  }
}

}  // namespace cofreq
