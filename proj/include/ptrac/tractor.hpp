#pragma once

// Tractor calculus over a chart geometry.  Slots run 0..n: slot 0 is the
// density slot, slots 1..n pair with the chart coordinates.  For a covariant
// rank-one value of weight 0 the connection acts as
//   (nabla_a V)_B = d_a V_B + C_a[B][C] V_C
// with
//   C_a[1+b][1+c] = -Gamma^c_ab + tau_a delta^c_b,   C_a[1+b][0] = P_ab,
//   C_a[0][1+c]   = -delta^c_a,                      C_a[0][0]   = tau_a,
// where tau_a = Gamma^b_{ba}/(n+1).  Contravariant values use -C^T, higher
// valence acts slotwise, and weight w adds w tau_a.  Parallel transport is
// fixed-step RK4 with connection matrices evaluated exactly at substage
// points.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "ptrac/core.hpp"
#include "ptrac/geometry.hpp"
#include "ptrac/rk4.hpp"

namespace ptrac {

struct TractorValue {
  int n = 0;
  int valence = 0;
  double weight = 0.0;
  bool covariant = true;
  Vec comp;  // (n+1)^valence entries, slot of the first index outermost

  static TractorValue zero(int n, int valence, double weight, bool covariant) {
    if (n < 2) throw ValidationError("tractor needs chart dimension >= 2");
    if (valence < 0 || valence > 4)
      throw ValidationError("tractor valence must lie in 0..4");
    TractorValue v;
    v.n = n;
    v.valence = valence;
    v.weight = weight;
    v.covariant = covariant;
    std::size_t m = 1;
    for (int i = 0; i < valence; ++i) m *= std::size_t(n) + 1;
    v.comp.assign(m, 0.0);
    return v;
  }

  std::size_t index(const std::vector<int>& slots) const {
    assert(int(slots.size()) == valence && "slot count mismatch");
    std::size_t idx = 0;
    for (int s : slots) {
      assert(s >= 0 && s <= n && "slot out of range");
      idx = idx * (std::size_t(n) + 1) + std::size_t(s);
    }
    return idx;
  }
  double& at(const std::vector<int>& slots) { return comp[index(slots)]; }
  double at(const std::vector<int>& slots) const { return comp[index(slots)]; }

  bool same_shape(const TractorValue& o) const {
    return n == o.n && valence == o.valence && weight == o.weight &&
           covariant == o.covariant;
  }
};

// Connection matrices C_a[B][C] at x, flattened [a][B][C] with B, C in 0..n.
inline std::vector<double> tractor_connection(const ChartGeometry& geom,
                                              const Vec& x) {
  const int n = geom.dim(), N = n + 1;
  std::vector<Jet> J = geom.christoffel_jets(x, 1);
  std::vector<Jet> tau = trace_covector_jets(J, n);
  std::vector<double> P = schouten_values(J, n);
  std::vector<double> C(std::size_t(n) * N * N, 0.0);
  auto cm = [&](int a, int B, int Cc) -> double& {
    return C[(std::size_t(a) * N + B) * N + Cc];
  };
  for (int a = 0; a < n; ++a) {
    const double ta = tau[a].value();
    cm(a, 0, 0) = ta;
    cm(a, 0, 1 + a) = -1.0;
    for (int b = 0; b < n; ++b) {
      cm(a, 1 + b, 0) = P[std::size_t(a) * n + b];
      for (int c = 0; c < n; ++c)
        cm(a, 1 + b, 1 + c) =
            -J[(std::size_t(c) * n + a) * n + b].value() + (b == c ? ta : 0.0);
    }
  }
  return C;
}

namespace detail {

// out = -(xdot . connection action on comp), the transport right-hand side.
inline void tractor_rhs(const std::vector<double>& C, int n,
                        const TractorValue& shape, const Vec& xdot,
                        const Vec& comp, Vec& out) {
  const int N = n + 1;
  const std::size_t m = comp.size();
  auto cm = [&](int a, int B, int Cc) {
    return C[(std::size_t(a) * N + B) * N + Cc];
  };
  // tau_a sits in the density-density corner of C_a.
  double wtau_dot = 0.0;
  for (int a = 0; a < n; ++a) wtau_dot += xdot[a] * cm(a, 0, 0);
  wtau_dot *= shape.weight;

  std::vector<int> slots(shape.valence);
  for (std::size_t idx = 0; idx < m; ++idx) {
    std::size_t rest = idx;
    for (int j = shape.valence - 1; j >= 0; --j) {
      slots[j] = int(rest % N);
      rest /= N;
    }
    double acc = wtau_dot * comp[idx];
    std::size_t stride = 1;
    for (int j = shape.valence - 1; j >= 0; --j) {
      const int B = slots[j];
      const std::size_t base = idx - std::size_t(B) * stride;
      for (int Cc = 0; Cc <= n; ++Cc) {
        double cBC = 0.0;
        for (int a = 0; a < n; ++a)
          cBC += xdot[a] * (shape.covariant ? cm(a, B, Cc) : -cm(a, Cc, B));
        acc += cBC * comp[base + std::size_t(Cc) * stride];
      }
      stride *= N;
    }
    out[idx] = -acc;
  }
}

}  // namespace detail

// A parametric path: fills x(t) and dx/dt(t).
using CurveFn = std::function<void(double, Vec&, Vec&)>;

inline CurveFn segment_curve(Vec from, Vec to) {
  return [from = std::move(from), to = std::move(to)](double t, Vec& x, Vec& xd) {
    const std::size_t n = from.size();
    x.resize(n);
    xd.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = from[i] + t * (to[i] - from[i]);
      xd[i] = to[i] - from[i];
    }
  };
}

// Parallel transport of v0 along the curve from parameter t0 to t1 with step
// magnitude h.  The path must stay inside the chart domain (checked at step
// endpoints).
inline TractorValue tractor_transport(const ChartGeometry& geom,
                                      const CurveFn& curve, double t0,
                                      double t1, TractorValue v0, double h) {
  if (!(h > 0)) throw ValidationError("transport needs step h > 0");
  if (v0.n != geom.dim())
    throw ValidationError("tractor dimension does not match the chart");
  const int n = geom.dim();
  Vec x(n), xd(n);
  curve(t0, x, xd);
  if (!geom.domain().contains(x))
    throw NumericalError("transport path left the domain");

  auto rhs = [&](double t, const Vec& comp, Vec& out) {
    curve(t, x, xd);
    const std::vector<double> C = tractor_connection(geom, x);
    detail::tractor_rhs(C, n, v0, xd, comp, out);
  };

  Rk4 rk(v0.comp.size());
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  while (dir * (t1 - t) > 1e-12) {
    const double step = dir * std::min(h, dir * (t1 - t));
    rk.step(rhs, t, step, v0.comp);
    t += step;
    curve(t, x, xd);
    if (!geom.domain().contains(x))
      throw NumericalError("transport path left the domain");
  }
  return v0;
}

// Differential lift of a weight-w density field to a covariant rank-one
// tractor of weight w - 1: slots (w f, nabla_a f).
inline TractorValue thomas_D(const ChartGeometry& geom, const ScalarField& f,
                             double w, const Vec& x) {
  const int n = geom.dim();
  TractorValue out = TractorValue::zero(n, 1, w - 1.0, true);
  out.comp[0] = w * f.value(x);
  Vec df = density_derivative(geom, f, w, x);
  for (int a = 0; a < n; ++a) out.comp[1 + a] = df[a];
  return out;
}

// Component change under a projective change with covector values `up`:
// covariant slots gain up_b times the density slot, contravariant density
// slots lose up . v.
inline TractorValue change_components(const TractorValue& v, const Vec& up) {
  if (int(up.size()) != v.n)
    throw ValidationError("change covector dimension mismatch");
  const int N = v.n + 1;
  TractorValue out = v;
  std::size_t stride = 1;
  for (int j = v.valence - 1; j >= 0; --j) {
    Vec next = out.comp;
    for (std::size_t idx = 0; idx < out.comp.size(); ++idx) {
      const int B = int(idx / stride % std::size_t(N));
      if (v.covariant) {
        if (B >= 1)
          next[idx] += up[B - 1] * out.comp[idx - std::size_t(B) * stride];
      } else {
        if (B == 0)
          for (int b = 0; b < v.n; ++b)
            next[idx] -= up[b] * out.comp[idx + std::size_t(1 + b) * stride];
      }
    }
    out.comp = std::move(next);
    stride *= N;
  }
  return out;
}

struct TractorCurvature {
  int n = 0;
  std::vector<double> k;  // [a][b][B][C]

  double at(int a, int b, int B, int C) const {
    const int N = n + 1;
    return k[((std::size_t(a) * n + b) * N + B) * N + C];
  }
  double max_abs() const {
    double m = 0;
    for (double v : k) m = std::max(m, std::fabs(v));
    return m;
  }
};

// kappa_ab = d_a C_b - d_b C_a + [C_a, C_b]; vanishes exactly when the
// connection is projectively flat.
inline TractorCurvature tractor_curvature(const ChartGeometry& geom,
                                          const Vec& x) {
  const int n = geom.dim(), N = n + 1;
  std::vector<Jet> J = geom.christoffel_jets(x, 1);
  std::vector<Jet> tau = trace_covector_jets(J, n);
  CurvatureData cd = curvature(geom, x);
  auto val = [&](int c, int a, int b) {
    return J[(std::size_t(c) * n + a) * n + b].value();
  };
  // plain partials of the Schouten tensor, recovered from the covariant ones
  auto dP = [&](int a, int b, int c) {
    double s = cd.dP(a, b, c);
    for (int e = 0; e < n; ++e)
      s += val(e, a, b) * cd.P(e, c) + val(e, a, c) * cd.P(b, e);
    return s;
  };
  // C_b and d_a C_b as dense matrices
  std::vector<double> C(std::size_t(n) * N * N, 0.0);
  std::vector<double> dC(std::size_t(n) * n * N * N, 0.0);
  auto cm = [&](int b, int B, int Cc) -> double& {
    return C[(std::size_t(b) * N + B) * N + Cc];
  };
  auto dcm = [&](int a, int b, int B, int Cc) -> double& {
    return dC[((std::size_t(a) * n + b) * N + B) * N + Cc];
  };
  for (int b = 0; b < n; ++b) {
    cm(b, 0, 0) = tau[b].value();
    cm(b, 0, 1 + b) = -1.0;
    for (int c = 0; c < n; ++c) {
      cm(b, 1 + c, 0) = cd.P(b, c);
      for (int d = 0; d < n; ++d)
        cm(b, 1 + c, 1 + d) = -val(d, b, c) + (c == d ? tau[b].value() : 0.0);
    }
    for (int a = 0; a < n; ++a) {
      dcm(a, b, 0, 0) = tau[b].d1(a);
      for (int c = 0; c < n; ++c) {
        dcm(a, b, 1 + c, 0) = dP(a, b, c);
        for (int d = 0; d < n; ++d)
          dcm(a, b, 1 + c, 1 + d) =
              -J[(std::size_t(d) * n + b) * n + c].d1(a) +
              (c == d ? tau[b].d1(a) : 0.0);
      }
    }
  }

  TractorCurvature out;
  out.n = n;
  out.k.assign(std::size_t(n) * n * N * N, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int B = 0; B < N; ++B)
        for (int Cc = 0; Cc < N; ++Cc) {
          double s = dcm(a, b, B, Cc) - dcm(b, a, B, Cc);
          for (int E = 0; E < N; ++E)
            s += cm(a, B, E) * cm(b, E, Cc) - cm(b, B, E) * cm(a, E, Cc);
          out.k[((std::size_t(a) * n + b) * N + B) * N + Cc] = s;
        }
  return out;
}

}  // namespace ptrac
