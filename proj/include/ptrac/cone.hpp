#pragma once

// The homogeneous cone over a chart geometry: coordinates (x^1..x^n, rho)
// with rho > 0.  The construction first passes to the trace-free
// representative of the projective class,
//   Gc^c_ab = Gamma^c_ab - tau_a delta^c_b - tau_b delta^c_a,
//   Pc_ab   = P_ab + d_a tau_b - Gamma^c_ab tau_c + tau_a tau_b,
// which depends only on the class, and then endows the cone with
//   Gh^c_ab = Gc^c_ab,      Gh^rho_ab  = -rho Pc_ab,
//   Gh^c_{a rho} = delta^c_a / rho,   all other components zero.
// This connection is Ricci-flat, satisfies nabla Z = identity for the
// dilation field Z = rho d_rho, and its parallel volume density is rho^n.
// Cone tangents at (x, rho) correspond to contravariant rank-one tractor
// components by nu^b = rho xi^b, lambda = v - rho tau_b xi^b.

#include <cmath>
#include <utility>
#include <vector>

#include "ptrac/core.hpp"
#include "ptrac/geometry.hpp"
#include "ptrac/linalg.hpp"
#include "ptrac/rk4.hpp"
#include "ptrac/tractor.hpp"

namespace ptrac {

class ConeGeometry {
 public:
  explicit ConeGeometry(ChartGeometry base) : base_(std::move(base)) {
    if (base_.dim() < 2)
      throw ValidationError("cone needs a base of dimension >= 2");
  }

  const ChartGeometry& base() const { return base_; }
  int base_dim() const { return base_.dim(); }
  int dim() const { return base_.dim() + 1; }

  bool contains(const Vec& y) const {
    assert(int(y.size()) == dim() && "cone point dimension mismatch");
    if (!(y.back() > 0)) return false;
    Vec x(y.begin(), y.end() - 1);
    return base_.domain().contains(x);
  }

  // Trace-free representative of the class at x, flat [c][a][b].
  std::vector<double> trace_free_christoffel(const Vec& x) const {
    const int n = base_.dim();
    std::vector<Jet> J = base_.christoffel_jets(x, 0);
    std::vector<Jet> tau = trace_covector_jets(J, n);
    std::vector<double> out(std::size_t(n) * n * n);
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          out[(std::size_t(c) * n + a) * n + b] =
              J[(std::size_t(c) * n + a) * n + b].value() -
              (c == a ? tau[b].value() : 0.0) - (c == b ? tau[a].value() : 0.0);
    return out;
  }

  // Schouten tensor of the trace-free representative at x, flat [a][b].
  std::vector<double> trace_free_schouten(const Vec& x) const {
    const int n = base_.dim();
    std::vector<Jet> J = base_.christoffel_jets(x, 1);
    std::vector<Jet> tau = trace_covector_jets(J, n);
    std::vector<double> P = schouten_values(J, n);
    std::vector<double> out(std::size_t(n) * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = P[std::size_t(a) * n + b] + tau[b].d1(a) +
                   tau[a].value() * tau[b].value();
        for (int c = 0; c < n; ++c)
          s -= J[(std::size_t(c) * n + a) * n + b].value() * tau[c].value();
        out[std::size_t(a) * n + b] = s;
      }
    return out;
  }

  // Cone Christoffels at y = (x, rho), flat [C][A][B] of size (n+1)^3.
  std::vector<double> christoffel(const Vec& y) const {
    const int n = base_.dim(), N = n + 1;
    const double rho = y.back();
    if (!(rho > 0)) throw ValidationError("cone point needs rho > 0");
    Vec x(y.begin(), y.end() - 1);

    std::vector<Jet> J = base_.christoffel_jets(x, 1);
    std::vector<Jet> tau = trace_covector_jets(J, n);
    std::vector<double> P = schouten_values(J, n);

    std::vector<double> G(std::size_t(N) * N * N, 0.0);
    auto out = [&](int C, int A, int B) -> double& {
      return G[(std::size_t(C) * N + A) * N + B];
    };
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          out(c, a, b) = J[(std::size_t(c) * n + a) * n + b].value() -
                         (c == a ? tau[b].value() : 0.0) -
                         (c == b ? tau[a].value() : 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double pc = P[std::size_t(a) * n + b] + tau[b].d1(a) +
                    tau[a].value() * tau[b].value();
        for (int c = 0; c < n; ++c)
          pc -= J[(std::size_t(c) * n + a) * n + b].value() * tau[c].value();
        out(n, a, b) = -rho * pc;
      }
    for (int a = 0; a < n; ++a) {
      out(a, a, n) = 1.0 / rho;
      out(a, n, a) = 1.0 / rho;
    }
    return G;
  }

 private:
  ChartGeometry base_;
};

// The dilation field rho d_rho at y.
inline Vec euler_field(const ConeGeometry& cone, const Vec& y) {
  Vec z(cone.dim(), 0.0);
  z.back() = y.back();
  return z;
}

// Volume of a frame of cone tangents against the parallel volume density
// rho^n dx^1...dx^n drho.
inline double cone_volume(const ConeGeometry& cone, const Vec& y,
                          const std::vector<Vec>& frame) {
  const int N = cone.dim();
  if (int(frame.size()) != N)
    throw ValidationError("cone volume needs n+1 frame vectors");
  std::vector<double> m(std::size_t(N) * N);
  for (int j = 0; j < N; ++j) {
    if (int(frame[j].size()) != N)
      throw ValidationError("cone frame vector has wrong dimension");
    for (int i = 0; i < N; ++i) m[std::size_t(i) * N + j] = frame[j][i];
  }
  return std::pow(y.back(), cone.base_dim()) * det(std::move(m), N);
}

// Geodesic of the cone connection; stops when x leaves the base domain or
// rho leaves (0, inf).
inline SampledCurve cone_geodesic(const ConeGeometry& cone, const Vec& y0,
                                  const Vec& w0, double T, double h) {
  const int N = cone.dim();
  if (int(y0.size()) != N || int(w0.size()) != N)
    throw ValidationError("cone geodesic data dimension mismatch");
  if (!(T > 0) || !(h > 0))
    throw ValidationError("cone geodesic needs T > 0 and h > 0");
  if (!cone.contains(y0))
    throw ValidationError("cone geodesic start lies outside the cone");

  Vec pos(N);
  auto deriv = [&](double, const Vec& s, Vec& ds) {
    for (int i = 0; i < N; ++i) pos[i] = s[i];
    const std::vector<double> G = cone.christoffel(pos);
    for (int i = 0; i < N; ++i) ds[i] = s[N + i];
    for (int c = 0; c < N; ++c) {
      double acc = 0;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          acc += G[(std::size_t(c) * N + a) * N + b] * s[N + a] * s[N + b];
      ds[N + c] = -acc;
    }
  };

  SampledCurve out;
  Vec s(2 * N);
  for (int i = 0; i < N; ++i) {
    s[i] = y0[i];
    s[N + i] = w0[i];
  }
  auto record = [&](double t) {
    out.t.push_back(t);
    out.x.emplace_back(s.begin(), s.begin() + N);
    out.v.emplace_back(s.begin() + N, s.end());
  };
  record(0.0);
  Rk4 rk(2 * N);
  double t = 0.0;
  while (t < T - 1e-12) {
    const double step = std::min(h, T - t);
    rk.step(deriv, t, step, s);
    Vec ys(s.begin(), s.begin() + N);
    if (!cone.contains(ys)) {
      out.complete = false;
      return out;
    }
    t += step;
    record(t);
  }
  return out;
}

struct ConeExp {
  Vec y;        // endpoint
  Vec w;        // transported velocity at the endpoint
  bool ok = false;
};

// Exponential map: follow the geodesic with initial tangent w0 to unit time.
inline ConeExp cone_exp(const ConeGeometry& cone, const Vec& y0, const Vec& w0,
                        double h) {
  SampledCurve c = cone_geodesic(cone, y0, w0, 1.0, h);
  ConeExp e;
  e.ok = c.complete;
  e.y = c.x.back();
  e.w = c.v.back();
  return e;
}

// Parallel transport of a cone tangent along a parametric cone curve.
inline Vec cone_transport(const ConeGeometry& cone, const CurveFn& curve,
                          double t0, double t1, Vec w0, double h) {
  if (!(h > 0)) throw ValidationError("cone transport needs step h > 0");
  const int N = cone.dim();
  if (int(w0.size()) != N)
    throw ValidationError("cone transport vector dimension mismatch");
  Vec y(N), yd(N);
  curve(t0, y, yd);
  if (!cone.contains(y))
    throw NumericalError("cone transport path left the cone");

  auto rhs = [&](double t, const Vec& w, Vec& out) {
    curve(t, y, yd);
    const std::vector<double> G = cone.christoffel(y);
    for (int c = 0; c < N; ++c) {
      double acc = 0;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          acc += yd[a] * G[(std::size_t(c) * N + a) * N + b] * w[b];
      out[c] = -acc;
    }
  };
  Rk4 rk(N);
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  while (dir * (t1 - t) > 1e-12) {
    const double step = dir * std::min(h, dir * (t1 - t));
    rk.step(rhs, t, step, w0);
    t += step;
    curve(t, y, yd);
    if (!cone.contains(y))
      throw NumericalError("cone transport path left the cone");
  }
  return w0;
}

// Pointwise correspondence between cone tangents at y = (x, rho) and
// contravariant rank-one tractor components (weight 0).
inline TractorValue cone_tangent_to_tractor(const ConeGeometry& cone,
                                            const Vec& y, const Vec& w) {
  const int n = cone.base_dim();
  if (int(w.size()) != n + 1)
    throw ValidationError("cone tangent dimension mismatch");
  const double rho = y.back();
  Vec x(y.begin(), y.end() - 1);
  Vec tau = trace_covector_values(cone.base().christoffel(x), n);
  TractorValue v = TractorValue::zero(n, 1, 0.0, false);
  double lam = w[n];
  for (int b = 0; b < n; ++b) {
    v.comp[1 + b] = rho * w[b];
    lam -= rho * tau[b] * w[b];
  }
  v.comp[0] = lam;
  return v;
}

inline Vec tractor_to_cone_tangent(const ConeGeometry& cone, const Vec& y,
                                   const TractorValue& v) {
  const int n = cone.base_dim();
  if (v.n != n || v.valence != 1 || v.covariant)
    throw ValidationError("expected a contravariant rank-one tractor");
  const double rho = y.back();
  Vec x(y.begin(), y.end() - 1);
  Vec tau = trace_covector_values(cone.base().christoffel(x), n);
  Vec w(n + 1);
  double vcomp = v.comp[0];
  for (int b = 0; b < n; ++b) {
    w[b] = v.comp[1 + b] / rho;
    vcomp += tau[b] * v.comp[1 + b];
  }
  w[n] = vcomp;
  return w;
}

}  // namespace ptrac
