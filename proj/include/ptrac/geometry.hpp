#pragma once

// Torsion-free affine connections on a single chart.  A geometry is either a
// table of Christoffel component fields or the Levi-Civita connection of a
// metric field table, plus an accumulated list of projective changes
//   Gamma^c_ab  ->  Gamma^c_ab + Up_a delta^c_b + Up_b delta^c_a.
// Curvature is normalized as
//   R_ab{}^c{}_d = d_a Gamma^c_bd - d_b Gamma^c_ad
//                + Gamma^c_ae Gamma^e_bd - Gamma^c_be Gamma^e_ad,
//   Ric_ab = R_ca{}^c{}_b,
//   (n-1) P_ab = Ric_ab - (2/(n+1)) Ric_[ab],
// and the Schouten derivative is the full covariant one,
//   dP_abc = d_a P_bc - Gamma^e_ab P_ec - Gamma^e_ac P_be.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ptrac/core.hpp"
#include "ptrac/expr.hpp"
#include "ptrac/jet.hpp"
#include "ptrac/linalg.hpp"
#include "ptrac/rk4.hpp"

namespace ptrac {

namespace detail {

// Packed index for a symmetric pair a <= b in dimension n.
inline int sym_pack(int n, int a, int b) {
  if (a > b) std::swap(a, b);
  return a * n - a * (a - 1) / 2 + (b - a);
}
inline int sym_count(int n) { return n * (n + 1) / 2; }

}  // namespace detail

struct Domain {
  Vec lo, hi;
  double ball = 0.0;  // when positive, points must also satisfy |x| < ball

  int dim() const { return int(lo.size()); }

  static Domain box(int n, double half) {
    Domain d;
    d.lo.assign(n, -half);
    d.hi.assign(n, half);
    return d;
  }

  bool contains(const Vec& x) const {
    assert(int(x.size()) == dim() && "point dimension mismatch");
    for (int i = 0; i < dim(); ++i)
      if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
    if (ball > 0.0) {
      double r2 = 0;
      for (double c : x) r2 += c * c;
      if (!(r2 < ball * ball)) return false;
    }
    return true;
  }

  // Uniform point in the domain shrunk by `shrink` toward the box center
  // (and toward the origin for the ball bound).
  Vec sample(Rng& rng, double shrink = 0.8) const {
    const int n = dim();
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Vec x(n);
      for (int i = 0; i < n; ++i) {
        const double c = 0.5 * (lo[i] + hi[i]);
        const double half = 0.5 * (hi[i] - lo[i]) * shrink;
        x[i] = c + rng.uniform(-half, half);
      }
      if (ball > 0.0) {
        double r2 = 0;
        for (double c : x) r2 += c * c;
        if (!(r2 < sqr(ball * shrink))) continue;
      }
      return x;
    }
    throw NumericalError("domain sampling kept rejecting points");
  }
};

class ChartGeometry {
 public:
  ChartGeometry() = default;

  // gamma holds Gamma^c_{ab} for a <= b, indexed [c * sym_count + pack(a,b)];
  // empty entries are identically zero.  Symmetry in (a, b) is built into the
  // storage rather than checked.
  static ChartGeometry from_christoffels(Domain domain, ScalarFieldList gamma) {
    ChartGeometry g;
    g.n_ = domain.dim();
    g.domain_ = std::move(domain);
    const int want = g.n_ * detail::sym_count(g.n_);
    if (int(gamma.size()) != want)
      throw ValidationError("christoffel table needs " + std::to_string(want) +
                            " packed components, got " +
                            std::to_string(gamma.size()));
    for (const ScalarField& f : gamma)
      if (!f.empty() && f.dim() != g.n_)
        throw ValidationError("christoffel component has wrong dimension");
    g.gamma_ = std::move(gamma);
    return g;
  }

  // metric holds g_{ab} for a <= b, indexed pack(a,b); empty entries are zero.
  static ChartGeometry from_metric(Domain domain, ScalarFieldList metric) {
    ChartGeometry g;
    g.n_ = domain.dim();
    g.domain_ = std::move(domain);
    if (int(metric.size()) != detail::sym_count(g.n_))
      throw ValidationError("metric table needs " +
                            std::to_string(detail::sym_count(g.n_)) +
                            " packed components, got " +
                            std::to_string(metric.size()));
    for (const ScalarField& f : metric)
      if (!f.empty() && f.dim() != g.n_)
        throw ValidationError("metric component has wrong dimension");
    g.metric_ = std::move(metric);
    return g;
  }

  int dim() const { return n_; }
  const Domain& domain() const { return domain_; }
  bool has_metric() const { return !metric_.empty(); }
  const ScalarFieldList& metric_fields() const { return metric_; }
  const std::vector<ScalarFieldList>& changes() const { return ups_; }

  // Gamma^c_{ab} values, flattened [c][a][b].
  std::vector<double> christoffel(const Vec& x) const {
    std::vector<Jet> J = christoffel_jets(x, 0);
    std::vector<double> out(J.size());
    for (std::size_t i = 0; i < J.size(); ++i) out[i] = J[i].value();
    return out;
  }

  // Jets of Gamma^c_{ab} to `order` (0..2), flattened [c][a][b].
  std::vector<Jet> christoffel_jets(const Vec& x, int order) const {
    assert(order >= 0 && order <= 2 && "christoffel jet order out of range");
    assert(int(x.size()) == n_ && "point dimension mismatch");
    const int n = n_;
    std::vector<Jet> G(std::size_t(n) * n * n, Jet::constant(n, order, 0.0));
    auto gidx = [n](int c, int a, int b) {
      return (std::size_t(c) * n + a) * n + b;
    };
    if (has_metric()) {
      const int mo = order + 1;
      std::vector<Jet> g = metric_jets(x, mo);
      std::vector<Jet> ginv = invert_jet_matrix(g, n);
      for (Jet& e : ginv) e = e.truncated(order);
      // dg[(e,a,b)] = jet of d_e g_ab at `order`
      std::vector<Jet> dg(std::size_t(n) * n * n, Jet::constant(n, order, 0.0));
      for (int e = 0; e < n; ++e)
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) {
            dg[gidx(e, a, b)] = g[std::size_t(a) * n + b].derivative(e);
            dg[gidx(e, b, a)] = dg[gidx(e, a, b)];
          }
      for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) {
            Jet s = Jet::constant(n, order, 0.0);
            for (int d = 0; d < n; ++d) {
              Jet inner = dg[gidx(a, d, b)] + dg[gidx(b, d, a)] - dg[gidx(d, a, b)];
              s += ginv[std::size_t(c) * n + d] * inner;
            }
            s *= 0.5;
            G[gidx(c, a, b)] = s;
            G[gidx(c, b, a)] = std::move(s);
          }
    } else {
      const int sc = detail::sym_count(n);
      for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) {
            const ScalarField& f = gamma_[std::size_t(c) * sc + detail::sym_pack(n, a, b)];
            if (f.empty()) continue;
            G[gidx(c, a, b)] = f.jet(x, order);
            G[gidx(c, b, a)] = G[gidx(c, a, b)];
          }
    }
    if (!ups_.empty()) {
      // Sum the change covectors first: a change followed by its pointwise
      // negation cancels here exactly, so the round trip reproduces the base
      // coefficients bit for bit.
      std::vector<Jet> U(n, Jet::constant(n, order, 0.0));
      for (const ScalarFieldList& up : ups_)
        for (int a = 0; a < n; ++a)
          if (!up[a].empty()) U[a] += up[a].jet(x, order);
      for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            if (c == b) G[gidx(c, a, b)] += U[a];
            if (c == a) G[gidx(c, a, b)] += U[b];
          }
    }
    return G;
  }

  // g_{ab} jets, full n*n mirrored table; metric geometries only.
  std::vector<Jet> metric_jets(const Vec& x, int order) const {
    if (!has_metric())
      throw ValidationError("geometry carries no metric");
    const int n = n_;
    std::vector<Jet> g(std::size_t(n) * n, Jet::constant(n, order, 0.0));
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const ScalarField& f = metric_[detail::sym_pack(n, a, b)];
        if (f.empty()) continue;
        g[std::size_t(a) * n + b] = f.jet(x, order);
        g[std::size_t(b) * n + a] = g[std::size_t(a) * n + b];
      }
    return g;
  }

  std::vector<double> metric_values(const Vec& x) const {
    if (!has_metric())
      throw ValidationError("geometry carries no metric");
    const int n = n_;
    std::vector<double> g(std::size_t(n) * n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const ScalarField& f = metric_[detail::sym_pack(n, a, b)];
        if (f.empty()) continue;
        g[std::size_t(a) * n + b] = f.value(x);
        g[std::size_t(b) * n + a] = g[std::size_t(a) * n + b];
      }
    return g;
  }

  friend ChartGeometry projective_change(const ChartGeometry& geom,
                                         const ScalarFieldList& upsilon);

 private:
  Domain domain_;
  int n_ = 0;
  ScalarFieldList gamma_;
  ScalarFieldList metric_;
  std::vector<ScalarFieldList> ups_;
};

inline ChartGeometry projective_change(const ChartGeometry& geom,
                                       const ScalarFieldList& upsilon) {
  if (int(upsilon.size()) != geom.dim())
    throw ValidationError("projective change needs one covector component per coordinate");
  for (const ScalarField& f : upsilon)
    if (!f.empty() && f.dim() != geom.dim())
      throw ValidationError("change covector component has wrong dimension");
  ChartGeometry out = geom;
  out.ups_.push_back(upsilon);
  return out;
}

inline ChartGeometry levi_civita(Domain domain, ScalarFieldList metric) {
  return ChartGeometry::from_metric(std::move(domain), std::move(metric));
}

// Trace covector tau_a = Gamma^b_{ba} / (n+1) as jets, from christoffel jets.
inline std::vector<Jet> trace_covector_jets(const std::vector<Jet>& G, int n) {
  const int order = G[0].order();
  std::vector<Jet> tau(n, Jet::constant(n, order, 0.0));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b)
      tau[a] += G[(std::size_t(b) * n + b) * n + a];
    tau[a] *= 1.0 / (n + 1);
  }
  return tau;
}

inline Vec trace_covector_values(const std::vector<double>& G, int n) {
  Vec tau(n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b)
      tau[a] += G[(std::size_t(b) * n + b) * n + a];
    tau[a] /= n + 1;
  }
  return tau;
}

// Ricci values straight from first-order christoffel jets:
//   Ric_ab = d_c G^c_ab - d_a G^c_cb + G^c_cd G^d_ab - G^c_ad G^d_cb.
inline std::vector<double> ricci_values(const std::vector<Jet>& J, int n) {
  auto jet = [&](int c, int a, int b) -> const Jet& {
    return J[(std::size_t(c) * n + a) * n + b];
  };
  std::vector<double> ric(std::size_t(n) * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0;
      for (int c = 0; c < n; ++c) {
        s += jet(c, a, b).d1(c) - jet(c, c, b).d1(a);
        for (int d = 0; d < n; ++d)
          s += jet(c, c, d).value() * jet(d, a, b).value() -
               jet(c, a, d).value() * jet(d, c, b).value();
      }
      ric[std::size_t(a) * n + b] = s;
    }
  return ric;
}

inline std::vector<double> schouten_values(const std::vector<Jet>& J, int n) {
  std::vector<double> ric = ricci_values(J, n);
  std::vector<double> P(std::size_t(n) * n);
  const double beta = 2.0 / (n + 1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double skew =
          0.5 * (ric[std::size_t(a) * n + b] - ric[std::size_t(b) * n + a]);
      P[std::size_t(a) * n + b] = (ric[std::size_t(a) * n + b] - beta * skew) / (n - 1);
    }
  return P;
}

struct CurvatureData {
  int n = 0;
  std::vector<double> riemann;     // [a][b][c][d] = R_ab{}^c{}_d
  std::vector<double> ricci;       // [a][b]
  std::vector<double> schouten;    // [a][b]
  std::vector<double> schouten_d;  // [a][b][c] = dP_abc

  double R(int a, int b, int c, int d) const {
    return riemann[((std::size_t(a) * n + b) * n + c) * n + d];
  }
  double Ric(int a, int b) const { return ricci[std::size_t(a) * n + b]; }
  double P(int a, int b) const { return schouten[std::size_t(a) * n + b]; }
  double dP(int a, int b, int c) const {
    return schouten_d[(std::size_t(a) * n + b) * n + c];
  }
};

inline CurvatureData curvature(const ChartGeometry& geom, const Vec& x) {
  const int n = geom.dim();
  std::vector<Jet> J = geom.christoffel_jets(x, 2);
  auto jet = [&](int c, int a, int b) -> const Jet& {
    return J[(std::size_t(c) * n + a) * n + b];
  };
  auto val = [&](int c, int a, int b) { return jet(c, a, b).value(); };

  CurvatureData cd;
  cd.n = n;
  cd.riemann.assign(std::size_t(n) * n * n * n, 0.0);
  cd.ricci.assign(std::size_t(n) * n, 0.0);
  cd.schouten.assign(std::size_t(n) * n, 0.0);
  cd.schouten_d.assign(std::size_t(n) * n * n, 0.0);

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double r = jet(c, b, d).d1(a) - jet(c, a, d).d1(b);
          for (int e = 0; e < n; ++e)
            r += val(c, a, e) * val(e, b, d) - val(c, b, e) * val(e, a, d);
          cd.riemann[((std::size_t(a) * n + b) * n + c) * n + d] = r;
        }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0;
      for (int c = 0; c < n; ++c) s += cd.R(c, a, c, b);
      cd.ricci[std::size_t(a) * n + b] = s;
    }
  const double beta = 2.0 / (n + 1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double skew = 0.5 * (cd.Ric(a, b) - cd.Ric(b, a));
      cd.schouten[std::size_t(a) * n + b] =
          (cd.Ric(a, b) - beta * skew) / (n - 1);
    }

  // d_e Ric_ab assembled from second christoffel derivatives, then the
  // covariant Schouten derivative.
  std::vector<double> dric(std::size_t(n) * n * n, 0.0);
  for (int e = 0; e < n; ++e)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0;
        for (int c = 0; c < n; ++c) {
          s += jet(c, a, b).d2(e, c) - jet(c, c, b).d2(e, a);
          for (int d = 0; d < n; ++d)
            s += jet(c, c, d).d1(e) * val(d, a, b) +
                 val(c, c, d) * jet(d, a, b).d1(e) -
                 jet(c, a, d).d1(e) * val(d, c, b) -
                 val(c, a, d) * jet(d, c, b).d1(e);
        }
        dric[(std::size_t(e) * n + a) * n + b] = s;
      }
  auto dP_partial = [&](int e, int a, int b) {
    const double dab = dric[(std::size_t(e) * n + a) * n + b];
    const double dba = dric[(std::size_t(e) * n + b) * n + a];
    return (dab - beta * 0.5 * (dab - dba)) / (n - 1);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double s = dP_partial(a, b, c);
        for (int e = 0; e < n; ++e)
          s -= val(e, a, b) * cd.P(e, c) + val(e, a, c) * cd.P(b, e);
        cd.schouten_d[(std::size_t(a) * n + b) * n + c] = s;
      }
  return cd;
}

// Covariant derivative of a weight-w density:
//   nabla_a f = d_a f + w tau_a f,   tau_a = Gamma^b_{ba} / (n+1).
inline Vec density_derivative(const ChartGeometry& geom, const ScalarField& f,
                              double w, const Vec& x) {
  if (f.empty()) throw ValidationError("density field is empty");
  if (f.dim() != geom.dim())
    throw ValidationError("density field dimension mismatch");
  const int n = geom.dim();
  const Jet fj = f.jet(x, 1);
  const Vec tau = trace_covector_values(geom.christoffel(x), n);
  Vec out(n);
  for (int a = 0; a < n; ++a) out[a] = fj.d1(a) + w * tau[a] * f.value(x);
  return out;
}

struct SampledCurve {
  Vec t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  bool complete = true;  // false when the curve left the domain early

  std::size_t size() const { return t.size(); }
};

// Affinely parametrized geodesic through (x0, v0), fixed-step RK4 on
// (x, v) with v'^c = -Gamma^c_{ab} v^a v^b.  Integration stops at the last
// sample inside the domain; `complete` records whether t = T was reached.
inline SampledCurve geodesic(const ChartGeometry& geom, const Vec& x0,
                             const Vec& v0, double T, double h) {
  const int n = geom.dim();
  if (int(x0.size()) != n || int(v0.size()) != n)
    throw ValidationError("geodesic data dimension mismatch");
  if (!(T > 0) || !(h > 0)) throw ValidationError("geodesic needs T > 0 and h > 0");
  if (!geom.domain().contains(x0))
    throw ValidationError("geodesic start lies outside the domain");

  Vec pt(n);
  auto deriv = [&](double, const Vec& y, Vec& dy) {
    for (int i = 0; i < n; ++i) pt[i] = y[i];
    const std::vector<double> G = geom.christoffel(pt);
    for (int i = 0; i < n; ++i) dy[i] = y[n + i];
    for (int c = 0; c < n; ++c) {
      double s = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          s += G[(std::size_t(c) * n + a) * n + b] * y[n + a] * y[n + b];
      dy[n + c] = -s;
    }
  };

  SampledCurve out;
  Vec y(2 * n);
  for (int i = 0; i < n; ++i) {
    y[i] = x0[i];
    y[n + i] = v0[i];
  }
  auto record = [&](double t) {
    out.t.push_back(t);
    out.x.emplace_back(y.begin(), y.begin() + n);
    out.v.emplace_back(y.begin() + n, y.end());
  };
  record(0.0);

  Rk4 rk(2 * n);
  double t = 0.0;
  while (t < T - 1e-12) {
    const double step = std::min(h, T - t);
    rk.step(deriv, t, step, y);
    Vec xs(y.begin(), y.begin() + n);
    if (!geom.domain().contains(xs)) {
      out.complete = false;
      return out;
    }
    t += step;
    record(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Registry of named geometries
// ---------------------------------------------------------------------------

namespace detail {

// "(x<lo>^2 + ... + x<hi>^2)", 1-based inclusive bounds.
inline std::string radius2_text(int lo, int hi) {
  std::string s = "(";
  for (int i = lo; i <= hi; ++i) {
    if (i > lo) s += " + ";
    s += "x" + std::to_string(i) + "^2";
  }
  return s + ")";
}

}  // namespace detail

inline std::vector<std::string> geometry_names() {
  return {"flat", "klein", "sphere-stereo", "ppwave", "s2xs2"};
}

// Named geometries.  flat/klein/sphere-stereo take any dimension n >= 2;
// ppwave and s2xs2 are four-dimensional (n must be 0 or 4).
inline ChartGeometry make_geometry(const std::string& name, int n = 0) {
  auto need_dim = [&](int fallback) {
    int d = n == 0 ? fallback : n;
    if (d < 2) throw ValidationError("geometry '" + name + "' needs dimension >= 2");
    return d;
  };
  if (name == "flat") {
    const int d = need_dim(2);
    ScalarFieldList gamma(std::size_t(d) * detail::sym_count(d));
    return ChartGeometry::from_christoffels(Domain::box(d, 1.5), std::move(gamma));
  }
  if (name == "klein") {
    const int d = need_dim(2);
    const std::string r2 = detail::radius2_text(1, d);
    ScalarFieldList g(detail::sym_count(d));
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        const std::string prod =
            "x" + std::to_string(a + 1) + "*x" + std::to_string(b + 1) +
            "/(1 - " + r2 + ")^2";
        std::string text = a == b ? "1/(1 - " + r2 + ") + " + prod : prod;
        g[detail::sym_pack(d, a, b)] = parse_field(text, d);
      }
    Domain dom = Domain::box(d, 0.95);
    dom.ball = 0.95;
    return ChartGeometry::from_metric(std::move(dom), std::move(g));
  }
  if (name == "sphere-stereo") {
    const int d = need_dim(2);
    const std::string diag = "4/(1 + " + detail::radius2_text(1, d) + ")^2";
    ScalarFieldList g(detail::sym_count(d));
    for (int a = 0; a < d; ++a)
      g[detail::sym_pack(d, a, a)] = parse_field(diag, d);
    return ChartGeometry::from_metric(Domain::box(d, 1.5), std::move(g));
  }
  if (name == "ppwave") {
    if (n != 0 && n != 4)
      throw ValidationError("geometry 'ppwave' is four-dimensional");
    // coordinates (x1, x2, x3, x4) = (u, v, x, y)
    ScalarFieldList g(detail::sym_count(4));
    g[detail::sym_pack(4, 0, 0)] = parse_field("x3^2 - x4^2", 4);
    g[detail::sym_pack(4, 0, 1)] = parse_field("1", 4);
    g[detail::sym_pack(4, 2, 2)] = parse_field("1", 4);
    g[detail::sym_pack(4, 3, 3)] = parse_field("1", 4);
    return ChartGeometry::from_metric(Domain::box(4, 1.5), std::move(g));
  }
  if (name == "s2xs2") {
    if (n != 0 && n != 4)
      throw ValidationError("geometry 's2xs2' is four-dimensional");
    ScalarFieldList g(detail::sym_count(4));
    const std::string d1 = "4/(1 + " + detail::radius2_text(1, 2) + ")^2";
    const std::string d2 = "4/(1 + " + detail::radius2_text(3, 4) + ")^2";
    g[detail::sym_pack(4, 0, 0)] = parse_field(d1, 4);
    g[detail::sym_pack(4, 1, 1)] = parse_field(d1, 4);
    g[detail::sym_pack(4, 2, 2)] = parse_field(d2, 4);
    g[detail::sym_pack(4, 3, 3)] = parse_field(d2, 4);
    return ChartGeometry::from_metric(Domain::box(4, 1.5), std::move(g));
  }
  throw ValidationError("unknown geometry '" + name + "'");
}

}  // namespace ptrac
