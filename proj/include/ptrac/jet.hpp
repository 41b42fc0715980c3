#pragma once

// Forward-mode Taylor jets up to third order in n variables.  A Jet carries
// value, gradient, Hessian and third-derivative tensor as dense arrays (the
// symmetric redundancy buys O(1) indexing; n stays small).  All derivative
// propagation is exact: finite differences appear only in test oracles.

#include <cmath>

#include "ptrac/core.hpp"

namespace ptrac {

class Jet {
 public:
  Jet() = default;
  Jet(int n, int order) : n_(n), order_(order) {
    assert(n >= 1 && order >= 0 && order <= 3 && "jet shape");
    if (order_ >= 1) g_.resize(n_);
    if (order_ >= 2) h_.resize(std::size_t(n_) * n_);
    if (order_ >= 3) t_.resize(std::size_t(n_) * n_ * n_);
    zero_derivs();
  }

  static Jet constant(int n, int order, double v) {
    Jet j(n, order);
    j.v_ = v;
    return j;
  }
  // The i-th coordinate function, seeded at value v.
  static Jet variable(int n, int order, int i, double v) {
    Jet j(n, order);
    j.v_ = v;
    if (order >= 1) j.g_[i] = 1.0;
    return j;
  }

  int dim() const { return n_; }
  int order() const { return order_; }
  double value() const { return v_; }

  double d1(int i) const { return order_ >= 1 ? g_[i] : 0.0; }
  double d2(int i, int j) const { return order_ >= 2 ? h_[idx2(i, j)] : 0.0; }
  double d3(int i, int j, int k) const {
    return order_ >= 3 ? t_[idx3(i, j, k)] : 0.0;
  }

  Jet operator-() const {
    Jet r = *this;
    r.v_ = -r.v_;
    r.scale_derivs(-1.0);
    return r;
  }

  Jet& operator+=(const Jet& o) {
    check_shape(o);
    v_ += o.v_;
    for (std::size_t i = 0; i < g_.size(); ++i) g_[i] += o.g_[i];
    for (std::size_t i = 0; i < h_.size(); ++i) h_[i] += o.h_[i];
    for (std::size_t i = 0; i < t_.size(); ++i) t_[i] += o.t_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check_shape(o);
    v_ -= o.v_;
    for (std::size_t i = 0; i < g_.size(); ++i) g_[i] -= o.g_[i];
    for (std::size_t i = 0; i < h_.size(); ++i) h_[i] -= o.h_[i];
    for (std::size_t i = 0; i < t_.size(); ++i) t_[i] -= o.t_[i];
    return *this;
  }
  Jet& operator+=(double c) {
    v_ += c;
    return *this;
  }
  Jet& operator-=(double c) {
    v_ -= c;
    return *this;
  }
  Jet& operator*=(double c) {
    v_ *= c;
    scale_derivs(c);
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double c) { return a += c; }
  friend Jet operator+(double c, Jet a) { return a += c; }
  friend Jet operator-(Jet a, double c) { return a -= c; }
  friend Jet operator-(double c, const Jet& a) { return -a + c; }
  friend Jet operator*(Jet a, double c) { return a *= c; }
  friend Jet operator*(double c, Jet a) { return a *= c; }
  friend Jet operator/(Jet a, double c) { return a *= 1.0 / c; }

  // Leibniz to third order.
  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check_shape(b);
    const int n = a.n_, ord = a.order_;
    Jet r(n, ord);
    r.v_ = a.v_ * b.v_;
    if (ord >= 1)
      for (int i = 0; i < n; ++i)
        r.g_[i] = a.g_[i] * b.v_ + a.v_ * b.g_[i];
    if (ord >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          r.h_[r.idx2(i, j)] = a.h_[a.idx2(i, j)] * b.v_ +
                               a.g_[i] * b.g_[j] + a.g_[j] * b.g_[i] +
                               a.v_ * b.h_[b.idx2(i, j)];
    if (ord >= 3)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            r.t_[r.idx3(i, j, k)] =
                a.t_[a.idx3(i, j, k)] * b.v_ + a.v_ * b.t_[b.idx3(i, j, k)] +
                a.h_[a.idx2(i, j)] * b.g_[k] + a.h_[a.idx2(i, k)] * b.g_[j] +
                a.h_[a.idx2(j, k)] * b.g_[i] + a.g_[i] * b.h_[b.idx2(j, k)] +
                a.g_[j] * b.h_[b.idx2(i, k)] + a.g_[k] * b.h_[b.idx2(i, j)];
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    if (b.v_ == 0.0) throw EvalError("division by zero");
    return a * b.reciprocal();
  }

  // f(u) with f^(k) evaluated at u.value(); Faa di Bruno to order 3.
  Jet chain(double f0, double f1, double f2, double f3) const {
    const int n = n_, ord = order_;
    Jet r(n, ord);
    r.v_ = f0;
    if (ord >= 1)
      for (int i = 0; i < n; ++i) r.g_[i] = f1 * g_[i];
    if (ord >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          r.h_[idx2(i, j)] = f2 * g_[i] * g_[j] + f1 * h_[idx2(i, j)];
    if (ord >= 3)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            r.t_[idx3(i, j, k)] =
                f3 * g_[i] * g_[j] * g_[k] +
                f2 * (h_[idx2(i, j)] * g_[k] + h_[idx2(i, k)] * g_[j] +
                      h_[idx2(j, k)] * g_[i]) +
                f1 * t_[idx3(i, j, k)];
    return r;
  }

  Jet reciprocal() const {
    if (v_ == 0.0) throw EvalError("division by zero");
    const double iv = 1.0 / v_;
    return chain(iv, -iv * iv, 2.0 * iv * iv * iv, -6.0 * iv * iv * iv * iv);
  }

  // The jet of the partial derivative along coordinate a (one order lower).
  Jet derivative(int a) const {
    assert(order_ >= 1 && "derivative needs order >= 1");
    Jet r(n_, order_ - 1);
    r.v_ = g_[a];
    if (r.order_ >= 1)
      for (int i = 0; i < n_; ++i) r.g_[i] = h_[idx2(a, i)];
    if (r.order_ >= 2)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) r.h_[r.idx2(i, j)] = t_[idx3(a, i, j)];
    return r;
  }

  // Forget derivatives above new_order.
  Jet truncated(int new_order) const {
    assert(new_order <= order_ && "truncation cannot raise order");
    Jet r(n_, new_order);
    r.v_ = v_;
    if (new_order >= 1)
      for (int i = 0; i < n_; ++i) r.g_[i] = g_[i];
    if (new_order >= 2)
      for (std::size_t i = 0; i < r.h_.size(); ++i) r.h_[i] = h_[i];
    if (new_order >= 3)
      for (std::size_t i = 0; i < r.t_.size(); ++i) r.t_[i] = t_[i];
    return r;
  }

 private:
  void zero_derivs() {
    g_.fill(0.0);
    h_.fill(0.0);
    t_.fill(0.0);
  }
  void scale_derivs(double c) {
    for (std::size_t i = 0; i < g_.size(); ++i) g_[i] *= c;
    for (std::size_t i = 0; i < h_.size(); ++i) h_[i] *= c;
    for (std::size_t i = 0; i < t_.size(); ++i) t_[i] *= c;
  }
  void check_shape(const Jet& o) const {
    assert(n_ == o.n_ && order_ == o.order_ && "jet shape mismatch");
    (void)o;
  }
  std::size_t idx2(int i, int j) const { return std::size_t(i) * n_ + j; }
  std::size_t idx3(int i, int j, int k) const {
    return (std::size_t(i) * n_ + j) * n_ + k;
  }

  int n_ = 1;
  int order_ = 0;
  double v_ = 0.0;
  InlineBuf<double, 4> g_;
  InlineBuf<double, 16> h_;
  InlineBuf<double, 64> t_;
};

inline Jet sin(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return u.chain(s, c, -s, -c);
}
inline Jet cos(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return u.chain(c, -s, -c, s);
}
inline Jet exp(const Jet& u) {
  const double e = std::exp(u.value());
  return u.chain(e, e, e, e);
}
inline Jet log(const Jet& u) {
  if (!(u.value() > 0.0)) throw EvalError("log of a non-positive value");
  const double iv = 1.0 / u.value();
  return u.chain(std::log(u.value()), iv, -iv * iv, 2.0 * iv * iv * iv);
}
inline Jet sqrt(const Jet& u) {
  if (u.value() < 0.0) throw EvalError("sqrt of a negative value");
  if (u.value() == 0.0) {
    if (u.order() == 0) return Jet::constant(u.dim(), 0, 0.0);
    throw EvalError("sqrt derivative singular at zero");
  }
  const double r = std::sqrt(u.value());
  const double f1 = 0.5 / r;
  const double f2 = -0.5 * f1 / u.value();
  const double f3 = -1.5 * f2 / u.value();
  return u.chain(r, f1, f2, f3);
}

// Integer powers; exponent may be negative (then u must not vanish).
inline Jet pow_int(const Jet& u, long k) {
  if (k == 0) return Jet::constant(u.dim(), u.order(), 1.0);
  if (k < 0 && u.value() == 0.0) throw EvalError("division by zero");
  const double uv = u.value();
  double f[4] = {0, 0, 0, 0};
  double coef = 1.0;
  for (int j = 0; j <= u.order(); ++j) {
    if (j > 0) coef *= double(k - (j - 1));
    // coef == 0 exactly when j exceeds a non-negative exponent.
    f[j] = coef == 0.0 ? 0.0 : coef * std::pow(uv, double(k - j));
  }
  return u.chain(f[0], f[1], f[2], f[3]);
}

}  // namespace ptrac
