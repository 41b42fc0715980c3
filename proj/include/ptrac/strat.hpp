#pragma once

// Chart stratification and scale geometry.
//
// stratify labels every node of a rectangular grid by the sign or vanishing
// pattern of the saturated values of a parallel tractor field, collects the
// zero locus (band nodes plus one bisection pass per sign-change edge), and
// flags each locus point smooth or singular by the gradient of the saturated
// scalar.  For quadric tractors it also restricts the h-slot to the locus
// tangent directions and reports its signature, the conformal data carried
// by the boundary.
//
// scale_geometry_check rescales the connection into the scale of a
// nonvanishing density sigma (Upsilon_a = -(1/w) sigma^{-1} nabla_a sigma),
// recomputes the Schouten tensor and its covariant derivative there, and for
// w = 2 compares P-hat against the slot metric
//     g_ab = (nu_a nu_b - sigma h_ab) / sigma^2,
// which is independent of the scale choice.  The Einstein ratio c is the
// pointwise Frobenius ratio of the two, sign-normalized so a definite g is
// positive.
//
// completeness_profile integrates the chart geodesic together with the
// reparametrization making it affine for the sigma-scale connection:
//     t' = phi,  phi'/phi = 2 Upsilon_a gammadot^a,
// with substeps capped so the logarithmic derivative stays resolved as the
// density approaches its zero band.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ptrac/bgg.hpp"
#include "ptrac/core.hpp"
#include "ptrac/geometry.hpp"
#include "ptrac/linalg.hpp"
#include "ptrac/model.hpp"
#include "ptrac/tractor.hpp"

namespace ptrac {

struct GridSpec {
  Vec lo, hi;
  std::vector<int> counts;

  int dim() const { return int(counts.size()); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int c : counts) s *= std::size_t(c);
    return s;
  }

  // row-major, last axis fastest
  Vec point(std::size_t flat) const {
    Vec x(dim());
    for (int d = dim() - 1; d >= 0; --d) {
      const std::size_t i = flat % std::size_t(counts[d]);
      flat /= std::size_t(counts[d]);
      x[d] = lo[d] + (hi[d] - lo[d]) * (double(i) / double(counts[d] - 1));
    }
    return x;
  }
};

struct StratOptions {
  double band = 1e-9;      // zero band on saturated values
  double grad_tol = 1e-6;  // locus gradient below this flags a singular point
  double fd_step = 1e-3;
  double normality_tol = 1e-6;
  int normality_curves = 3;
  int normality_samples = 12;
  int bisect_iters = 80;
  unsigned seed = 42;
};

struct ZeroLocusPoint {
  Vec x;
  Vec values;  // saturated values at x
  PTypeLabel label;
  bool smooth = true;
  bool on_grid = true;  // band node, as opposed to a bisected edge crossing
  std::vector<double> boundary_form;  // quadric case: h-slot on locus tangents
  Signature boundary_signature{};
  bool has_boundary_form = false;
};

struct StratReport {
  GridSpec grid;
  std::vector<PTypeLabel> labels;     // per node, row-major
  std::map<std::string, int> counts;  // node labels only
  std::vector<ZeroLocusPoint> zero_points;

  // distinct classes seen, counting the detected locus as its own stratum
  int strata() const {
    std::set<std::string> s;
    for (const PTypeLabel& l : labels) s.insert(l.text);
    for (const ZeroLocusPoint& z : zero_points) s.insert(z.label.text);
    return int(s.size());
  }
};

namespace detail {

inline Vec saturated_values(TensorFamily family,
                            const std::vector<TractorField>& fields,
                            const Vec& x) {
  if (family == TensorFamily::PairCovectors)
    return {saturate(fields[0](x), TensorFamily::Covector)[0],
            saturate(fields[1](x), TensorFamily::Covector)[0]};
  return saturate(fields[0](x), family);
}

// signed scalar whose zero set is the stratum boundary; the skew family has
// no sign and is handled by band membership alone
inline double locus_scalar(TensorFamily family, const Vec& q) {
  if (family == TensorFamily::PairCovectors) return q[0] * q[1];
  return q[0];
}

}  // namespace detail

inline StratReport stratify(const ChartGeometry& geom,
                            std::vector<TractorField> fields,
                            TensorFamily family, const GridSpec& grid,
                            StratOptions opt = {}) {
  const int n = geom.dim();
  if (grid.dim() != n || int(grid.lo.size()) != n || int(grid.hi.size()) != n)
    throw ValidationError("grid dimension does not match the chart");
  for (int d = 0; d < n; ++d) {
    if (grid.counts[d] < 2) throw ValidationError("grid needs >= 2 nodes per axis");
    if (!(grid.lo[d] < grid.hi[d]))
      throw ValidationError("grid bounds must be increasing");
  }
  if (family == TensorFamily::SymK)
    throw ValidationError("family has no chart stratification rule");
  const std::size_t want = family == TensorFamily::PairCovectors ? 2 : 1;
  if (fields.size() != want)
    throw ValidationError("family needs " + std::to_string(want) +
                          " tractor field(s)");
  for (const TractorField& f : fields)
    if (!f) throw ValidationError("empty tractor field");

  // parallel certificate before trusting the field
  {
    Rng rng(opt.seed);
    std::vector<CurveFn> curves;
    for (int c = 0; c < opt.normality_curves; ++c) {
      const Vec a = geom.domain().sample(rng, 0.7);
      const Vec b = geom.domain().sample(rng, 0.7);
      curves.push_back(segment_curve(a, b));
    }
    NormalityOptions nopt;
    nopt.fd_step = opt.fd_step;
    nopt.samples = opt.normality_samples;
    for (const TractorField& f : fields)
      if (!(normality_check(geom, f, curves, nopt) < opt.normality_tol))
        throw ValidationError("tractor field fails the parallel certificate");
  }

  StratReport rep;
  rep.grid = grid;
  const std::size_t total = grid.size();
  std::vector<Vec> values(total);
  std::vector<double> scalars(total, 0.0);
  rep.labels.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Vec x = grid.point(i);
    if (!geom.domain().contains(x))
      throw ValidationError("grid leaves the chart domain");
    values[i] = detail::saturated_values(family, fields, x);
    scalars[i] = detail::locus_scalar(family, values[i]);
    PTypeLabel l = detail::label_values(family, values[i], opt.band);
    ++rep.counts[l.text];
    rep.labels.push_back(std::move(l));
  }

  auto in_band = [&](const Vec& q) {
    double m = 0;
    for (double v : q) m = std::max(m, std::fabs(v));
    if (family == TensorFamily::PairCovectors)
      m = std::min(std::fabs(q[0]), std::fabs(q[1]));
    return m <= opt.band;
  };

  std::vector<ZeroLocusPoint> zeros;
  for (std::size_t i = 0; i < total; ++i)
    if (in_band(values[i])) {
      ZeroLocusPoint z;
      z.x = grid.point(i);
      z.values = values[i];
      z.label = rep.labels[i];
      z.on_grid = true;
      zeros.push_back(std::move(z));
    }

  // one bisection pass per strict sign-change edge
  if (family != TensorFamily::Skew2) {
    std::size_t stride = 1;
    for (int d = n - 1; d >= 0; --d) {
      for (std::size_t i = 0; i < total; ++i) {
        const std::size_t id =
            (i / stride) % std::size_t(grid.counts[d]);
        if (id + 1 == std::size_t(grid.counts[d])) continue;
        const std::size_t j = i + stride;
        const double s1 = scalars[i], s2 = scalars[j];
        if (in_band(values[i]) || in_band(values[j]) || s1 * s2 >= 0) continue;
        Vec a = grid.point(i), b = grid.point(j);
        double fa = s1;
        Vec qm;
        Vec m(n);
        for (int it = 0; it < opt.bisect_iters; ++it) {
          for (int k = 0; k < n; ++k) m[k] = 0.5 * (a[k] + b[k]);
          qm = detail::saturated_values(family, fields, m);
          if (in_band(qm)) break;
          const double fm = detail::locus_scalar(family, qm);
          if (fa * fm < 0) {
            b = m;
          } else {
            a = m;
            fa = fm;
          }
        }
        ZeroLocusPoint z;
        z.x = m;
        z.values = qm;
        z.label = detail::label_values(family, qm, opt.band);
        z.on_grid = false;
        zeros.push_back(std::move(z));
      }
      stride *= std::size_t(grid.counts[d]);
    }
  }

  // smoothness and boundary data per locus point
  for (ZeroLocusPoint& z : zeros) {
    double h = opt.fd_step;
    auto probes_fit = [&](double hh) {
      for (int a = 0; a < n; ++a)
        for (double off : {2.0 * hh, hh, -hh, -2.0 * hh}) {
          Vec p = z.x;
          p[a] += off;
          if (!geom.domain().contains(p)) return false;
        }
      return true;
    };
    int shrink = 0;
    while (!probes_fit(h) && shrink++ < 8) h *= 0.5;
    if (shrink > 8)
      throw ValidationError("locus gradient stencil leaves the domain");

    if (family == TensorFamily::Skew2) {
      // Jacobian of the k-system; the locus is smooth at rank 2
      const int rows = int(z.values.size());
      std::vector<double> Jm(std::size_t(rows) * n, 0.0);
      for (int a = 0; a < n; ++a) {
        Vec q[4];
        int s = 0;
        for (double off : {2.0 * h, h, -h, -2.0 * h}) {
          Vec p = z.x;
          p[a] += off;
          q[s++] = detail::saturated_values(family, fields, p);
        }
        for (int r = 0; r < rows; ++r)
          Jm[std::size_t(r) * n + a] =
              (-q[0][r] + 8 * q[1][r] - 8 * q[2][r] + q[3][r]) / (12 * h);
      }
      std::vector<double> gram(std::size_t(rows) * rows, 0.0);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < rows; ++c)
          for (int a = 0; a < n; ++a)
            gram[std::size_t(r) * rows + c] +=
                Jm[std::size_t(r) * n + a] * Jm[std::size_t(c) * n + a];
      const Vec ev = jacobi_eigenvalues(gram, rows);
      int rank = 0;
      for (double v : ev)
        if (v > opt.grad_tol * opt.grad_tol) ++rank;
      z.smooth = rank == std::min(2, n);
    } else {
      Vec grad(n, 0.0);
      for (int a = 0; a < n; ++a) {
        double q[4];
        int s = 0;
        for (double off : {2.0 * h, h, -h, -2.0 * h}) {
          Vec p = z.x;
          p[a] += off;
          q[s++] = detail::locus_scalar(
              family, detail::saturated_values(family, fields, p));
        }
        grad[a] = (-q[0] + 8 * q[1] - 8 * q[2] + q[3]) / (12 * h);
      }
      double g2 = 0;
      for (double g : grad) g2 += g * g;
      z.smooth = std::sqrt(g2) > opt.grad_tol;

      if (family == TensorFamily::Sym2 && z.smooth && n >= 2) {
        // h-slot restricted to the locus tangent space
        const TractorValue v = fields[0](z.x);
        const double gn = std::sqrt(g2);
        Vec unit = grad;
        for (double& g : unit) g /= gn;
        std::vector<Vec> tang;
        for (int a = 0; a < n && int(tang.size()) < n - 1; ++a) {
          Vec t(n, 0.0);
          t[a] = 1.0;
          double d = 0;
          for (int k = 0; k < n; ++k) d += t[k] * unit[k];
          for (int k = 0; k < n; ++k) t[k] -= d * unit[k];
          for (const Vec& prev : tang) {
            double p = 0;
            for (int k = 0; k < n; ++k) p += t[k] * prev[k];
            for (int k = 0; k < n; ++k) t[k] -= p * prev[k];
          }
          double nn = 0;
          for (double c : t) nn += c * c;
          if (nn < 0.25) continue;
          nn = std::sqrt(nn);
          for (double& c : t) c /= nn;
          tang.push_back(std::move(t));
        }
        const int m = int(tang.size());
        z.boundary_form.assign(std::size_t(m) * m, 0.0);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) {
            double s = 0;
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b)
                s += 0.5 *
                     (v.comp[std::size_t(1 + a) * (n + 1) + 1 + b] +
                      v.comp[std::size_t(1 + b) * (n + 1) + 1 + a]) *
                     tang[i][a] * tang[j][b];
            z.boundary_form[std::size_t(i) * m + j] = s;
          }
        z.boundary_signature = signature_of(z.boundary_form, m, opt.band);
        z.has_boundary_form = true;
      }
    }
  }
  rep.zero_points = std::move(zeros);
  return rep;
}

struct ScaleOptions {
  double eps = 1e-6;  // minimum |sigma| on the probed region
};

struct ScalePointData {
  Vec x;
  std::vector<double> phat;       // n*n
  std::vector<double> phat_grad;  // n*n*n, covariant derivative
  std::vector<double> g;          // n*n slot metric, w = 2 only
  double c = 0;                   // pointwise ratio phat : g
};

struct ScaleReport {
  double phat_sup = 0;
  double phat_grad_sup = 0;
  bool metric_defined = false;
  double c = 0;
  double c_spread = 0;
  double c_residual = 0;  // sup |phat - c_pt g|
  Signature g_signature{};
  std::vector<ScalePointData> points;
};

inline ScaleReport scale_geometry_check(const ChartGeometry& geom,
                                        const DensitySolution& s,
                                        const std::vector<Vec>& pts,
                                        ScaleOptions opt = {}) {
  detail::check_density(geom, s);
  if (pts.empty()) throw ValidationError("no probe points");
  const int n = geom.dim();
  const double w = s.w;

  ScaleReport rep;
  for (const Vec& x : pts) {
    if (int(x.size()) != n || !geom.domain().contains(x))
      throw ValidationError("probe point outside the chart domain");
    const std::vector<Jet> G = geom.christoffel_jets(x, 2);
    const std::vector<Jet> tau = trace_covector_jets(G, n);
    auto gam = [&](int c, int a, int b) -> const Jet& {
      return G[(std::size_t(c) * n + a) * n + b];
    };
    const Jet sig = s.f.jet(x, 3);
    const double f0 = sig.value();
    if (!(std::fabs(f0) > opt.eps))
      throw ValidationError("scale vanishes in the probed region");

    std::vector<Jet> u, ups;
    const Jet rec = sig.truncated(2).reciprocal();
    for (int c = 0; c < n; ++c) {
      u.push_back(sig.derivative(c) + w * tau[c].truncated(2) * sig.truncated(2));
      ups.push_back((-1.0 / w) * u[c] * rec);
    }

    const CurvatureData cd = curvature(geom, x);
    auto at2 = [n](std::vector<double>& m, int a, int b) -> double& {
      return m[std::size_t(a) * n + b];
    };

    ScalePointData pd;
    pd.x = x;
    pd.phat.assign(std::size_t(n) * n, 0.0);
    std::vector<Jet> dups;  // (nabla Upsilon)_bc, order 1
    dups.reserve(std::size_t(n) * n);
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        Jet d = ups[c].derivative(b);
        for (int e = 0; e < n; ++e)
          d -= gam(e, b, c).truncated(1) * ups[e].truncated(1);
        dups.push_back(std::move(d));
        at2(pd.phat, b, c) = cd.P(b, c) - dups.back().value() +
                             ups[b].value() * ups[c].value();
      }
    for (double v : pd.phat) rep.phat_sup = std::max(rep.phat_sup, std::fabs(v));

    pd.phat_grad.assign(std::size_t(n) * n * n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double d = cd.dP(a, b, c);  // nabla_a P_bc for the chart connection
          for (int e = 0; e < n; ++e)
            d += gam(e, a, b).value() * cd.P(e, c) +
                 gam(e, a, c).value() * cd.P(b, e);
          d -= dups[std::size_t(b) * n + c].d1(a);
          d += (ups[b] * ups[c]).d1(a);
          // d now holds the coordinate derivative of phat_bc
          auto ghat = [&](int cc, int aa, int bb) {
            double g = gam(cc, aa, bb).value();
            if (cc == bb) g += ups[aa].value();
            if (cc == aa) g += ups[bb].value();
            return g;
          };
          for (int e = 0; e < n; ++e)
            d -= ghat(e, a, b) * at2(pd.phat, e, c) +
                 ghat(e, a, c) * at2(pd.phat, b, e);
          pd.phat_grad[(std::size_t(a) * n + b) * n + c] = d;
          rep.phat_grad_sup = std::max(rep.phat_grad_sup, std::fabs(d));
        }

    if (w == 2.0) {
      std::vector<double> h(std::size_t(n) * n, 0.0);
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          Jet t = u[c].derivative(b) + w * tau[b].truncated(1) * u[c].truncated(1);
          for (int e = 0; e < n; ++e)
            t -= gam(e, b, c).truncated(1) * u[e].truncated(1);
          at2(h, b, c) = t.value();  // T_bc
        }
      pd.g.assign(std::size_t(n) * n, 0.0);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const double hab = 0.25 * (at2(h, a, b) + at2(h, b, a)) +
                             0.5 * (cd.P(a, b) + cd.P(b, a)) * f0;
          const double nu_a = 0.5 * u[std::size_t(a)].value();
          const double nu_b = 0.5 * u[std::size_t(b)].value();
          at2(pd.g, a, b) = (nu_a * nu_b - f0 * hab) / (f0 * f0);
        }
      double num = 0, den = 0;
      for (std::size_t i = 0; i < pd.g.size(); ++i) {
        num += pd.phat[i] * pd.g[i];
        den += pd.g[i] * pd.g[i];
      }
      if (!(den > 0)) throw NumericalError("slot metric is numerically zero");
      pd.c = num / den;
      rep.metric_defined = true;
    }
    rep.points.push_back(std::move(pd));
  }

  if (rep.metric_defined) {
    // orient so a definite metric comes out positive
    const Signature s0 = signature_of(rep.points[0].g, n, 1e-9);
    const double flip = s0.neg > s0.pos ? -1.0 : 1.0;
    double cmin = 0, cmax = 0;
    bool first = true;
    for (ScalePointData& pd : rep.points) {
      for (double& v : pd.g) v *= flip;
      pd.c *= flip;
      for (std::size_t i = 0; i < pd.g.size(); ++i)
        rep.c_residual = std::max(
            rep.c_residual, std::fabs(pd.phat[i] - pd.c * pd.g[i]));
      if (first) {
        cmin = cmax = pd.c;
        first = false;
      } else {
        cmin = std::min(cmin, pd.c);
        cmax = std::max(cmax, pd.c);
      }
    }
    rep.c = 0.5 * (cmin + cmax);
    rep.c_spread = cmax - cmin;
    rep.g_signature = signature_of(rep.points[0].g, n, 1e-9);
  }
  return rep;
}

struct ProfileSample {
  double s = 0, t = 0, sigma = 0;
};

struct CompletenessProfile {
  std::vector<ProfileSample> samples;
  bool hit_band = false;
  bool left_domain = false;
};

struct ProfileOptions {
  double step = 1e-3;      // outer sample spacing in the chart parameter
  double band = 1e-9;      // stop when |sigma| falls into the band
  double eps = 1e-6;       // minimum |sigma| at the start point
  double sub_limit = 0.05; // cap on |psi'| * substep
  std::size_t max_substeps = 2000000;
};

inline CompletenessProfile completeness_profile(const ChartGeometry& geom,
                                                const DensitySolution& s,
                                                const Vec& start,
                                                const Vec& dir, double s_end,
                                                ProfileOptions opt = {}) {
  detail::check_density(geom, s);
  const int n = geom.dim();
  if (int(start.size()) != n || int(dir.size()) != n)
    throw ValidationError("start or direction dimension mismatch");
  if (!geom.domain().contains(start))
    throw ValidationError("start point outside the chart domain");
  if (!(s_end > 0) || !(opt.step > 0))
    throw ValidationError("profile needs positive length and step");
  if (!(std::fabs(s.f.value(start)) > opt.eps))
    throw ValidationError("scale vanishes at the start point");

  // state: x, v, psi = log t', t
  Vec y(2 * std::size_t(n) + 2, 0.0);
  std::copy(start.begin(), start.end(), y.begin());
  std::copy(dir.begin(), dir.end(), y.begin() + n);

  auto deriv = [&](const Vec& st, Vec& out) {
    const Vec x(st.begin(), st.begin() + n);
    const Vec v(st.begin() + n, st.begin() + 2 * std::size_t(n));
    const Vec gam = geom.christoffel(x);
    out.assign(st.size(), 0.0);
    for (int i = 0; i < n; ++i) out[i] = v[i];
    for (int c = 0; c < n; ++c) {
      double acc = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          acc += gam[(std::size_t(c) * n + a) * n + b] * v[a] * v[b];
      out[std::size_t(n) + c] = -acc;
    }
    const Vec u = density_derivative(geom, s.f, s.w, x);
    const double sv = s.f.value(x);
    double uv = 0;
    for (int a = 0; a < n; ++a) uv += u[a] * v[a];
    out[2 * std::size_t(n)] = -(2.0 / s.w) * uv / sv;  // psi' = 2 Upsilon(v)
    out[2 * std::size_t(n) + 1] = std::exp(st[2 * std::size_t(n)]);
  };

  CompletenessProfile prof;
  auto record = [&](double sp) {
    if (!prof.samples.empty() && prof.samples.back().s == sp) return;
    Vec x(y.begin(), y.begin() + n);
    prof.samples.push_back({sp, y[2 * std::size_t(n) + 1], s.f.value(x)});
  };
  record(0.0);

  Vec k1, k2, k3, k4, tmp;
  std::size_t used = 0;
  double sp = 0;
  while (sp < s_end - 1e-15) {
    const double target = std::min(s_end, sp + opt.step);
    while (sp < target - 1e-15) {
      const Vec x(y.begin(), y.begin() + n);
      if (!geom.domain().contains(x)) {
        prof.left_domain = true;
        record(sp);
        return prof;
      }
      const double sv = s.f.value(x);
      if (std::fabs(sv) <= opt.band) {
        prof.hit_band = true;
        record(sp);
        return prof;
      }
      deriv(y, k1);
      const double rate = std::fabs(k1[2 * std::size_t(n)]);
      double h = target - sp;
      if (rate * h > opt.sub_limit) h = opt.sub_limit / rate;
      if (++used > opt.max_substeps)
        throw NumericalError("profile substep budget exhausted");
      tmp = y;
      for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      deriv(tmp, k2);
      for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      deriv(tmp, k3);
      for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
      deriv(tmp, k4);
      for (std::size_t i = 0; i < y.size(); ++i)
        y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      sp += h;
    }
    record(sp);
  }
  return prof;
}

}  // namespace ptrac
