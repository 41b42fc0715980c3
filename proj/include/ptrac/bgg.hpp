#pragma once

// First operators of the projective hierarchy on weighted scalar densities
// and weight-2 one-forms, their prolongations into tractors, and a
// parallelism certificate.  With nabla the density-coupled derivative the
// residuals are, using unit-weight symmetrization (...),
//   D1 sigma = nabla_(a nabla_b) sigma + P_(ab) sigma                  w = 1
//   D2 sigma = nabla_(a nabla_b nabla_c) sigma + 4 P_(ab nabla_c) sigma
//            + 2 (nabla_(a P_bc)) sigma                                w = 2
//   Dk k     = nabla_(a k_b)                                           w = 2
// Solutions lift to parallel tractors,
//   sigma |-> (sigma; nabla_a sigma)                      second order
//   sigma |-> (sigma; nu_a = nabla_a sigma / 2;
//              h_ab = sym(nabla_a nabla_b sigma)/2 + P_(ab) sigma)
// and saturate() reads the densities back off the slots.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "ptrac/core.hpp"
#include "ptrac/expr.hpp"
#include "ptrac/geometry.hpp"
#include "ptrac/jet.hpp"
#include "ptrac/tractor.hpp"

namespace ptrac {

struct DensitySolution {
  double w = 1.0;  // projective weight
  ScalarField f;   // component in the chart-scale trivialization
};

struct WeightedOneForm {
  ScalarFieldList k;  // k_a components; the form carries weight 2
};

// Model families a tractor value can be read back into.
enum class TensorFamily { Covector, Sym2, Skew2, SymK, PairCovectors };

// A tractor-valued field in chart components.
using TractorField = std::function<TractorValue(const Vec&)>;

namespace detail {

inline void check_density(const ChartGeometry& geom, const DensitySolution& s) {
  if (s.f.empty()) throw ValidationError("density component field is empty");
  if (s.f.dim() != geom.dim())
    throw ValidationError("density field dimension mismatch");
}

// Chain of density-coupled covariant derivatives in exact jet arithmetic:
//   u_a = nabla_a sigma, T_ab = nabla_a u_b, R_abc = nabla_a T_bc,
// each stage adding one -Gamma contraction per index plus w tau.  depth 2
// fills u and T, depth 3 also R.
struct DensityChain {
  double sigma = 0;
  Vec u;                  // [a]
  std::vector<double> T;  // [a*n + b]
  std::vector<double> R;  // [(a*n + b)*n + c]
};

inline DensityChain density_chain(const ChartGeometry& geom,
                                  const ScalarField& f, double w, const Vec& x,
                                  int depth) {
  const int n = geom.dim();
  std::vector<Jet> G = geom.christoffel_jets(x, depth - 1);
  std::vector<Jet> tau = trace_covector_jets(G, n);
  auto gam = [&](int c, int a, int b) -> const Jet& {
    return G[(std::size_t(c) * n + a) * n + b];
  };
  const Jet sig = f.jet(x, depth);

  DensityChain out;
  out.sigma = sig.value();

  const int uo = depth - 1;
  std::vector<Jet> u;
  u.reserve(n);
  for (int c = 0; c < n; ++c)
    u.push_back(sig.derivative(c) +
                w * tau[c].truncated(uo) * sig.truncated(uo));
  out.u.resize(n);
  for (int c = 0; c < n; ++c) out.u[c] = u[c].value();

  const int to = depth - 2;
  std::vector<Jet> T;
  T.reserve(std::size_t(n) * n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      Jet t =
          u[c].derivative(b) + w * tau[b].truncated(to) * u[c].truncated(to);
      for (int e = 0; e < n; ++e)
        t -= gam(e, b, c).truncated(to) * u[e].truncated(to);
      T.push_back(std::move(t));
    }
  out.T.resize(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) out.T[i] = T[i].value();

  if (depth >= 3) {
    out.R.assign(std::size_t(n) * n * n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double r = T[std::size_t(b) * n + c].d1(a) +
                     w * tau[a].value() * out.T[std::size_t(b) * n + c];
          for (int e = 0; e < n; ++e)
            r -= gam(e, a, b).value() * out.T[std::size_t(e) * n + c] +
                 gam(e, a, c).value() * out.T[std::size_t(b) * n + e];
          out.R[(std::size_t(a) * n + b) * n + c] = r;
        }
  }
  return out;
}

}  // namespace detail

// Symmetrized second-order residual, flattened [a*n + b].  The antisymmetric
// remainder cancels for every torsion-free connection (the trace adjustment
// inside P eats the d tau term); when `skew` is given the measured remainder
// is written there as an implementation diagnostic.
inline std::vector<double> bgg_residual_k1(const ChartGeometry& geom,
                                           const DensitySolution& s,
                                           const Vec& x,
                                           double* skew = nullptr) {
  detail::check_density(geom, s);
  const int n = geom.dim();
  if (int(x.size()) != n) throw ValidationError("point dimension mismatch");
  detail::DensityChain ch = detail::density_chain(geom, s.f, s.w, x, 2);
  const std::vector<double> P = schouten_values(geom.christoffel_jets(x, 1), n);
  std::vector<double> out(std::size_t(n) * n);
  double worst = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double mab =
          ch.T[std::size_t(a) * n + b] + P[std::size_t(a) * n + b] * ch.sigma;
      const double mba =
          ch.T[std::size_t(b) * n + a] + P[std::size_t(b) * n + a] * ch.sigma;
      out[std::size_t(a) * n + b] = 0.5 * (mab + mba);
      worst = std::max(worst, std::fabs(0.5 * (mab - mba)));
    }
  if (skew) *skew = worst;
  return out;
}

// Fully symmetrized third-order residual, flattened [(a*n + b)*n + c].
inline std::vector<double> bgg_residual_k2(const ChartGeometry& geom,
                                           const DensitySolution& s,
                                           const Vec& x) {
  detail::check_density(geom, s);
  const int n = geom.dim();
  if (int(x.size()) != n) throw ValidationError("point dimension mismatch");
  detail::DensityChain ch = detail::density_chain(geom, s.f, s.w, x, 3);
  const CurvatureData cd = curvature(geom, x);
  auto raw = [&](int a, int b, int c) {
    return ch.R[(std::size_t(a) * n + b) * n + c] +
           4.0 * cd.P(a, b) * ch.u[c] + 2.0 * cd.dP(a, b, c) * ch.sigma;
  };
  std::vector<double> out(std::size_t(n) * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        out[(std::size_t(a) * n + b) * n + c] =
            (raw(a, b, c) + raw(a, c, b) + raw(b, a, c) + raw(b, c, a) +
             raw(c, a, b) + raw(c, b, a)) /
            6.0;
  return out;
}

// Symmetrized derivative nabla_(a k_b) of a weight-2 one-form, [a*n + b].
inline std::vector<double> bgg_residual_skew(const ChartGeometry& geom,
                                             const WeightedOneForm& k,
                                             const Vec& x) {
  const int n = geom.dim();
  if (int(k.k.size()) != n)
    throw ValidationError("one-form needs one component per coordinate");
  for (const ScalarField& f : k.k)
    if (!f.empty() && f.dim() != n)
      throw ValidationError("one-form component dimension mismatch");
  if (int(x.size()) != n) throw ValidationError("point dimension mismatch");

  const std::vector<double> G = geom.christoffel(x);
  const Vec tau = trace_covector_values(G, n);
  std::vector<Jet> kj;
  kj.reserve(n);
  for (const ScalarField& f : k.k)
    kj.push_back(f.empty() ? Jet::constant(n, 1, 0.0) : f.jet(x, 1));
  auto cov = [&](int a, int b) {
    double s = kj[b].d1(a) + 2.0 * tau[a] * kj[b].value();
    for (int e = 0; e < n; ++e)
      s -= G[(std::size_t(e) * n + a) * n + b] * kj[e].value();
    return s;
  };
  std::vector<double> out(std::size_t(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      out[std::size_t(a) * n + b] = 0.5 * (cov(a, b) + cov(b, a));
  return out;
}

// Lift of a weight-1 density to the rank-1 cotractor (sigma; nabla_a sigma).
inline TractorField prolong_k1(const ChartGeometry& geom, DensitySolution s) {
  detail::check_density(geom, s);
  return [geom, s = std::move(s)](const Vec& x) {
    const int n = geom.dim();
    TractorValue v = TractorValue::zero(n, 1, 0.0, true);
    v.comp[0] = s.f.value(x);
    const Vec df = density_derivative(geom, s.f, s.w, x);
    for (int a = 0; a < n; ++a) v.comp[std::size_t(1 + a)] = df[a];
    return v;
  };
}

// Lift of a weight-2 density to the symmetric rank-2 cotractor
// (sigma; nu; h); the value is parallel exactly when sigma solves the
// third-order equation, and then
//   nabla sigma = 2 nu, nabla_a nu_b = h_ab - P_ab sigma,
//   nabla_a h_bc = -P_ab nu_c - P_ac nu_b.
inline TractorField prolong_k2(const ChartGeometry& geom, DensitySolution s) {
  detail::check_density(geom, s);
  return [geom, s = std::move(s)](const Vec& x) {
    const int n = geom.dim();
    detail::DensityChain ch = detail::density_chain(geom, s.f, s.w, x, 2);
    const std::vector<double> P =
        schouten_values(geom.christoffel_jets(x, 1), n);
    TractorValue v = TractorValue::zero(n, 2, 0.0, true);
    v.at({0, 0}) = ch.sigma;
    for (int a = 0; a < n; ++a) {
      v.at({1 + a, 0}) = v.at({0, 1 + a}) = 0.5 * ch.u[a];
      for (int b = 0; b < n; ++b)
        v.at({1 + a, 1 + b}) =
            0.25 * (ch.T[std::size_t(a) * n + b] +
                    ch.T[std::size_t(b) * n + a]) +
            0.5 * (P[std::size_t(a) * n + b] + P[std::size_t(b) * n + a]) *
                ch.sigma;
    }
    return v;
  };
}

// Projection complementary to the lifts: reads the density content off the
// slots of a tractor value.
inline Vec saturate(const TractorValue& v, TensorFamily family) {
  switch (family) {
    case TensorFamily::Covector:
      if (v.valence != 1 || !v.covariant)
        throw ValidationError("family expects a covariant rank-1 tractor");
      return {v.comp[0]};
    case TensorFamily::Sym2:
      if (v.valence != 2 || !v.covariant)
        throw ValidationError("family expects a covariant rank-2 tractor");
      return {v.comp[0]};
    case TensorFamily::Skew2: {
      if (v.valence != 2 || !v.covariant)
        throw ValidationError("family expects a covariant rank-2 tractor");
      Vec k(v.n);
      for (int a = 0; a < v.n; ++a) k[a] = v.at({1 + a, 0});
      return k;
    }
    default:
      throw ValidationError("family has no saturation rule");
  }
}

struct NormalityOptions {
  double fd_step = 1e-3;  // curve-parameter stencil width
  int samples = 20;       // interior samples per curve
};

// Sup over curves and samples of |nabla_xdot V|, the parameter derivative of
// the components by a fourth-order stencil plus the connection action.  A
// small sup certifies the field as parallel along the sampled bundle.
inline double normality_check(const ChartGeometry& geom, const TractorField& V,
                              const std::vector<CurveFn>& curves,
                              NormalityOptions opt = {}) {
  if (curves.empty()) throw ValidationError("normality check needs curves");
  if (!(opt.fd_step > 0) || !(opt.fd_step < 0.2) || opt.samples < 1)
    throw ValidationError("normality options out of range");
  const int n = geom.dim();
  const double h = opt.fd_step;
  double sup = 0;
  Vec x(n), xd(n), xs(n), xds(n);
  for (const CurveFn& curve : curves) {
    for (int j = 0; j < opt.samples; ++j) {
      const double t = 2 * h + (1.0 - 4 * h) * ((j + 0.5) / opt.samples);
      curve(t, x, xd);
      if (!geom.domain().contains(x))
        throw ValidationError("normality curve leaves the domain");
      const TractorValue v0 = V(x);
      if (v0.n != n)
        throw ValidationError("tractor dimension does not match the chart");

      Vec dot(v0.comp.size(), 0.0);
      static constexpr double coef[4] = {-1.0, 8.0, -8.0, 1.0};
      const double offs[4] = {2 * h, h, -h, -2 * h};
      for (int sten = 0; sten < 4; ++sten) {
        curve(t + offs[sten], xs, xds);
        if (!geom.domain().contains(xs))
          throw ValidationError("normality curve leaves the domain");
        const TractorValue vs = V(xs);
        if (!vs.same_shape(v0))
          throw ValidationError("tractor field changes shape along the curve");
        for (std::size_t i = 0; i < dot.size(); ++i)
          dot[i] += coef[sten] * vs.comp[i];
      }
      for (double& d : dot) d /= 12.0 * h;

      const std::vector<double> C = tractor_connection(geom, x);
      Vec rhs(v0.comp.size());
      detail::tractor_rhs(C, n, v0, xd, v0.comp, rhs);
      for (std::size_t i = 0; i < dot.size(); ++i)
        sup = std::max(sup, std::fabs(dot[i] - rhs[i]));
    }
  }
  return sup;
}

}  // namespace ptrac
