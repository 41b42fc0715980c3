#pragma once

// Frames and generalised homogeneous coordinates built from the cone.
//
// Fix an anchor point xb in the chart, a lift height rho0 and base frame
// vectors e_1..e_n at xb; lift them horizontally to q0 = (xb, rho0) and
// rescale uniformly so that together with e_0 = the dilation field the
// cone volume is one.  For a chart point x, shooting finds the tangent
// sum_i t^i e_i at q0 whose cone geodesic arrives over x at unit time;
// with rho_e the arrival value of rho this defines the normal scale and
// coordinates
//   s(x) = 1 / rho_e,   X^0 = s,   X^i = s t^i.
// On an affine chart of the flat class with the standard setup this gives
// X = (1, x - xb) and s = 1.
//
// The frame at x parallel-transports the e_i along the radial geodesic,
// keeps e_0 = the dilation field taken pointwise at the arrival point,
// and passes to
//   f_0 = e_0 - (X^i / X^0) e_i,   f_i = e_i,
// all expressed as rank-one tractors at x; the f_A agree with the
// parallel transports of their anchor values.  Component transfer is the
// plain expansion in this basis: parallel tractors have constant
// components, the canonical tractor (1; 0..0) has components X^A, and for
// a parallel rank-one H with sigma = H_0 the expansion K satisfies
// sigma(x) = K_A X^A(x) across the chart.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "ptrac/cone.hpp"
#include "ptrac/core.hpp"
#include "ptrac/geometry.hpp"
#include "ptrac/linalg.hpp"
#include "ptrac/rk4.hpp"
#include "ptrac/tractor.hpp"

namespace ptrac {

struct FrameOptions {
  double shoot_tol = 1e-10;  // Newton residual bound on the base target
  int max_newton = 50;
  double exp_step = 1e-2;  // RK4 step for each cone exponential
  double fd_delta = 1e-6;  // forward-difference step for the Jacobian
  double cond_limit = 1e6;
  double march_step = 0.05;  // radial increment of the validity march
  // continuation spacing of cold shooting solves; walking the target out
  // from the anchor keeps Newton on the principal branch of the
  // exponential, which is multivalued on positively curved charts
  double chain_step = 0.25;
};

// Frame of cone tangents at y: the n horizontal coordinate vectors,
// uniformly rescaled, followed by the dilation field.  The rescale
// rho^-(n+1)/n makes the frame volume against rho^n dx drho exactly one.
inline std::vector<Vec> adapted_frame(const ConeGeometry& cone, const Vec& y) {
  const int n = cone.base_dim();
  if (int(y.size()) != n + 1)
    throw ValidationError("cone point dimension mismatch");
  const double rho = y.back();
  if (!(rho > 0)) throw ValidationError("cone point needs rho > 0");
  const double lam = std::pow(rho, -double(n + 1) / double(n));
  std::vector<Vec> fr;
  for (int i = 0; i < n; ++i) {
    Vec e(n + 1, 0.0);
    e[i] = lam;
    fr.push_back(std::move(e));
  }
  fr.push_back(euler_field(cone, y));
  return fr;
}

class NormalFrame {
 public:
  struct Shooting {
    Vec coeff;        // tangent components in the coordinate basis
    double rho = 1;   // arrival value of rho
    double cond = 1;  // condition number of the shooting Jacobian
  };

  struct Frame {
    std::vector<TractorValue> vectors;    // f_0, f_1..f_n (contravariant)
    std::vector<TractorValue> covectors;  // dual basis f^0..f^n (covariant)
    Vec hom;                              // X at the point
    double s = 1;
  };

  NormalFrame(ChartGeometry base, Vec anchor, FrameOptions opt = {})
      : NormalFrame(std::move(base), std::move(anchor), {}, 1.0, opt) {}

  // basis holds the anchor frame vectors e_1..e_n (empty = standard basis);
  // rho0 picks the lift height of the anchor
  NormalFrame(ChartGeometry base, Vec anchor, std::vector<Vec> basis,
              double rho0, FrameOptions opt = {})
      : cone_(std::move(base)), anchor_(std::move(anchor)), opt_(opt) {
    const int n = cone_.base_dim();
    if (int(anchor_.size()) != n)
      throw ValidationError("anchor dimension mismatch");
    if (!cone_.base().domain().contains(anchor_))
      throw ValidationError("anchor must lie in the chart domain");
    if (!(opt_.exp_step > 0) || !(opt_.shoot_tol > 0) ||
        !(opt_.march_step > 0) || !(opt_.chain_step > 0))
      throw ValidationError("frame options must be positive");
    if (!(rho0 > 0)) throw ValidationError("lift height must be positive");
    rho0_ = rho0;

    basis_.assign(std::size_t(n) * n, 0.0);
    if (basis.empty()) {
      for (int i = 0; i < n; ++i) basis_[std::size_t(i) * n + i] = 1.0;
    } else {
      if (int(basis.size()) != n)
        throw ValidationError("anchor frame needs n vectors");
      for (int j = 0; j < n; ++j) {
        if (int(basis[j].size()) != n)
          throw ValidationError("anchor frame vector dimension mismatch");
        for (int i = 0; i < n; ++i)
          basis_[std::size_t(i) * n + j] = basis[j][i];
      }
    }
    const double d = det(basis_, n);
    if (!(std::fabs(d) > 1e-12)) throw ValidationError("degenerate frame");
    // rescale so the lifted frame with the dilation field has unit volume
    mu_ = std::pow(std::pow(rho0_, n + 1) * std::fabs(d), -1.0 / n);
    for (double& u : basis_) u *= mu_;
    basis_inv_ = invert(basis_, n);
  }

  const ConeGeometry& cone() const { return cone_; }
  const ChartGeometry& base() const { return cone_.base(); }
  const Vec& anchor() const { return anchor_; }
  const FrameOptions& options() const { return opt_; }

  Shooting shoot(const Vec& x) const {
    const int n = cone_.base_dim();
    if (int(x.size()) != n) throw ValidationError("point dimension mismatch");
    if (!cone_.base().domain().contains(x))
      throw ValidationError("point outside the chart domain");
    {
      std::lock_guard<std::mutex> lk(lock_);
      auto it = cache_.find(x);
      if (it != cache_.end()) return it->second;
    }
    Vec d(n);
    double dist = 0;
    for (int i = 0; i < n; ++i) {
      d[i] = x[i] - anchor_[i];
      dist += d[i] * d[i];
    }
    dist = std::sqrt(dist);
    const int m = std::max(1, int(std::ceil(dist / opt_.chain_step)));
    Shooting s;
    for (int k = 1; k <= m; ++k) {
      Vec xk(n), guess(n);
      for (int i = 0; i < n; ++i) xk[i] = anchor_[i] + (double(k) / m) * d[i];
      if (k == 1) {
        guess = xk;
        for (int i = 0; i < n; ++i) guess[i] -= anchor_[i];
      } else {
        // extrapolate the previous stage along the ray
        for (int i = 0; i < n; ++i)
          guess[i] = s.coeff[i] * (double(k) / (k - 1));
      }
      s = solve(xk, std::move(guess));
    }
    std::lock_guard<std::mutex> lk(lock_);
    cache_.emplace(x, s);
    return s;
  }

  double scale(const Vec& x) const { return 1.0 / shoot(x).rho; }

  // shooting coefficients in the anchor frame basis
  Vec frame_coefficients(const Shooting& sh) const {
    const int n = cone_.base_dim();
    Vec t(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        t[i] += basis_inv_[std::size_t(i) * n + j] * sh.coeff[j];
    return t;
  }

  Vec hom_coords(const Vec& x) const {
    Shooting sh = shoot(x);
    const double s = 1.0 / sh.rho;
    Vec t = frame_coefficients(sh);
    Vec X(cone_.dim());
    X[0] = s;
    for (int i = 0; i < cone_.base_dim(); ++i) X[1 + i] = s * t[i];
    return X;
  }

  Frame frame_at(const Vec& x) const {
    const int n = cone_.base_dim(), N = n + 1;
    Shooting sh = shoot(x);
    Vec t = frame_coefficients(sh);

    // one joint run: the radial geodesic carrying the n anchor vectors
    Vec state(std::size_t(2 + n) * N, 0.0);
    for (int i = 0; i < n; ++i) state[i] = anchor_[i];
    state[n] = rho0_;
    for (int i = 0; i < n; ++i) state[N + i] = sh.coeff[i];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        state[std::size_t(2 + j) * N + i] = basis_[std::size_t(i) * n + j];

    auto rhs = [&](double, const Vec& st, Vec& out) {
      Vec y(st.begin(), st.begin() + N);
      const std::vector<double> G = cone_.christoffel(y);
      auto gm = [&](int C, int A, int B) {
        return G[(std::size_t(C) * N + A) * N + B];
      };
      out.assign(st.size(), 0.0);
      const double* yd = st.data() + N;
      for (int i = 0; i < N; ++i) out[i] = yd[i];
      for (int blk = 1; blk <= n + 1; ++blk) {
        // blk == 1 moves the velocity itself, the rest move the frame
        const double* v = st.data() + std::size_t(blk) * N;
        double* o = out.data() + std::size_t(blk) * N;
        for (int c = 0; c < N; ++c) {
          double acc = 0;
          for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) acc += gm(c, a, b) * yd[a] * v[b];
          o[c] = -acc;
        }
      }
    };
    const int steps = std::max(1, int(std::ceil(1.0 / opt_.exp_step)));
    const double h = 1.0 / steps;
    Rk4 rk(state.size());
    double time = 0;
    for (int k = 0; k < steps; ++k) {
      rk.step(rhs, time, h, state);
      time += h;
      Vec y(state.begin(), state.begin() + N);
      if (!cone_.contains(y))
        throw NumericalError("radial geodesic left the cone");
    }

    Vec y_end(state.begin(), state.begin() + N);
    Frame fr;
    fr.s = 1.0 / sh.rho;
    fr.hom.assign(N, 0.0);
    fr.hom[0] = fr.s;
    for (int i = 0; i < n; ++i) fr.hom[1 + i] = fr.s * t[i];

    Vec f0 = euler_field(cone_, y_end);
    for (int j = 0; j < n; ++j) {
      const double* e = state.data() + std::size_t(2 + j) * N;
      for (int i = 0; i < N; ++i) f0[i] -= t[j] * e[i];
    }
    fr.vectors.push_back(cone_tangent_to_tractor(cone_, y_end, f0));
    for (int j = 0; j < n; ++j) {
      Vec ej(state.begin() + std::size_t(2 + j) * N,
             state.begin() + std::size_t(3 + j) * N);
      fr.vectors.push_back(cone_tangent_to_tractor(cone_, y_end, ej));
    }

    std::vector<double> M(std::size_t(N) * N);
    for (int j = 0; j < N; ++j)
      for (int B = 0; B < N; ++B)
        M[std::size_t(B) * N + j] = fr.vectors[j].comp[B];
    std::vector<double> Mi = invert(std::move(M), N);
    for (int j = 0; j < N; ++j) {
      TractorValue cv = TractorValue::zero(n, 1, 0.0, true);
      for (int B = 0; B < N; ++B) cv.comp[B] = Mi[std::size_t(j) * N + B];
      fr.covectors.push_back(std::move(cv));
    }
    return fr;
  }

  // Components of a tractor value at x in the frame there: the plain
  // expansion in the f-basis, so covariant slots are contracted with the
  // frame vectors and contravariant ones with the dual covectors.
  Vec components(const TractorValue& v, const Vec& x) const {
    if (v.n != cone_.base_dim())
      throw ValidationError("tractor dimension mismatch");
    const int N = v.n + 1;
    Frame fr = frame_at(x);
    const std::vector<TractorValue>& basis =
        v.covariant ? fr.vectors : fr.covectors;
    Vec cur = v.comp, next;
    for (int p = 0; p < v.valence; ++p) {
      std::size_t stride = 1;
      for (int q = p + 1; q < v.valence; ++q) stride *= N;
      const std::size_t block = stride * N;
      next.assign(cur.size(), 0.0);
      for (std::size_t o = 0; o < cur.size(); o += block)
        for (int j = 0; j < N; ++j)
          for (int B = 0; B < N; ++B) {
            const double w = basis[j].comp[B];
            if (w == 0.0) continue;
            for (std::size_t r = 0; r < stride; ++r)
              next[o + std::size_t(j) * stride + r] +=
                  w * cur[o + std::size_t(B) * stride + r];
          }
      cur.swap(next);
    }
    return cur;
  }

  // Largest radius around the anchor within which shooting converges with a
  // well-conditioned Jacobian.  Probes the axis and diagonal directions,
  // caps each at the domain boundary, and bisects the first failure.
  double validity_radius() const {
    {
      std::lock_guard<std::mutex> lk(lock_);
      if (radius_ >= 0) return radius_;
    }
    const int n = cone_.base_dim();
    std::vector<Vec> dirs;
    for (int i = 0; i < n; ++i) {
      Vec d(n, 0.0);
      d[i] = 1.0;
      dirs.push_back(d);
      d[i] = -1.0;
      dirs.push_back(std::move(d));
    }
    for (int mask = 0; mask < (1 << n); ++mask) {
      Vec d(n);
      for (int i = 0; i < n; ++i)
        d[i] = ((mask >> i) & 1 ? 1.0 : -1.0) / std::sqrt(double(n));
      dirs.push_back(std::move(d));
    }

    double w = std::numeric_limits<double>::infinity();
    for (const Vec& dir : dirs) {
      const double edge = domain_edge(dir);
      double good = 0.0, bad = -1.0;
      Vec warm;
      for (double r = opt_.march_step; r < edge; r += opt_.march_step) {
        Attempt a = attempt(point_at(dir, r), warm);
        if (!a.ok) {
          bad = r;
          break;
        }
        good = r;
        warm = a.coeff;
      }
      double w_dir = edge;
      if (bad > 0) {
        double lo = good, hi = bad;
        for (int it = 0; it < 12; ++it) {
          const double mid = 0.5 * (lo + hi);
          Attempt a = attempt(point_at(dir, mid), warm);
          if (a.ok) {
            lo = mid;
            warm = a.coeff;
          } else {
            hi = mid;
          }
        }
        w_dir = lo;
      }
      w = std::min(w, w_dir);
    }
    std::lock_guard<std::mutex> lk(lock_);
    radius_ = w;
    return radius_;
  }

 private:
  struct Attempt {
    bool ok = false;
    Vec coeff;
  };

  Vec point_at(const Vec& dir, double r) const {
    Vec x = anchor_;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += r * dir[i];
    return x;
  }

  // boundary of the chart domain along dir, by bracketing and bisection
  double domain_edge(const Vec& dir) const {
    const Domain& dom = cone_.base().domain();
    double hi = opt_.march_step;
    int guard = 0;
    while (dom.contains(point_at(dir, hi))) {
      hi *= 2;
      if (++guard > 60) return hi;  // unbounded domain, march caps elsewhere
    }
    double lo = 0.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dom.contains(point_at(dir, mid)) ? lo : hi) = mid;
    }
    return lo;
  }

  bool endpoint(const Vec& c, Vec& y_end) const {
    const int n = cone_.base_dim();
    Vec y0(n + 1), w0(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      y0[i] = anchor_[i];
      w0[i] = c[i];
    }
    y0[n] = rho0_;
    ConeExp e = cone_exp(cone_, y0, w0, opt_.exp_step);
    if (!e.ok) return false;
    y_end = std::move(e.y);
    return true;
  }

  static double cond_of(const std::vector<double>& J, int n) {
    std::vector<double> gram(std::size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int k = 0; k < n; ++k)
          acc += J[std::size_t(k) * n + i] * J[std::size_t(k) * n + j];
        gram[std::size_t(i) * n + j] = acc;
      }
    Vec ev = jacobi_eigenvalues(std::move(gram), n);
    if (!(ev.front() > 0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(ev.back() / ev.front());
  }

  // Damped Newton iteration on c -> base part of the unit-time endpoint.
  Shooting solve(const Vec& x, Vec c) const {
    const int n = cone_.base_dim();
    Vec y(n + 1);
    int guard = 0;
    while (!endpoint(c, y)) {
      for (double& u : c) u *= 0.5;
      if (++guard > 60) throw NumericalError("shooting cannot start");
    }
    Vec F(n);
    auto fill_residual = [&](const Vec& yy, Vec& out) {
      for (int i = 0; i < n; ++i) out[i] = yy[i] - x[i];
    };
    auto max_abs = [&](const Vec& v) {
      double m = 0;
      for (double u : v) m = std::max(m, std::fabs(u));
      return m;
    };
    fill_residual(y, F);
    double fn = max_abs(F);

    std::vector<double> J(std::size_t(n) * n);
    bool have_j = false;
    for (int it = 0; it < opt_.max_newton && fn >= opt_.shoot_tol; ++it) {
      Vec yj(n + 1), Fj(n);
      for (int j = 0; j < n; ++j) {
        double d = opt_.fd_delta * std::max(1.0, std::fabs(c[j]));
        Vec cj = c;
        cj[j] += d;
        if (!endpoint(cj, yj)) {
          // fall back to a backward difference at the domain edge
          d = -d;
          cj = c;
          cj[j] += d;
          if (!endpoint(cj, yj))
            throw NumericalError("shooting Jacobian evaluation failed");
        }
        fill_residual(yj, Fj);
        for (int i = 0; i < n; ++i)
          J[std::size_t(i) * n + j] = (Fj[i] - F[i]) / d;
      }
      have_j = true;

      Vec neg(n);
      for (int i = 0; i < n; ++i) neg[i] = -F[i];
      Vec dc = lu_solve(J, std::move(neg), n);

      bool moved = false;
      double lam = 1.0;
      // a step needing damping below 2^-12 points nowhere useful
      for (int half = 0; half < 12; ++half, lam *= 0.5) {
        Vec ct = c;
        for (int i = 0; i < n; ++i) ct[i] += lam * dc[i];
        Vec yt(n + 1);
        if (!endpoint(ct, yt)) continue;
        Vec Ft(n);
        fill_residual(yt, Ft);
        const double ftn = max_abs(Ft);
        if (ftn < fn) {
          c = std::move(ct);
          y = std::move(yt);
          F = std::move(Ft);
          fn = ftn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (fn >= opt_.shoot_tol)
      throw NumericalError("shooting failed to converge");

    if (!have_j) {
      // converged immediately; build the Jacobian once for the condition
      Vec yj(n + 1), Fj(n);
      for (int j = 0; j < n; ++j) {
        double d = opt_.fd_delta * std::max(1.0, std::fabs(c[j]));
        Vec cj = c;
        cj[j] += d;
        if (!endpoint(cj, yj)) {
          d = -d;
          cj = c;
          cj[j] += d;
          if (!endpoint(cj, yj))
            throw NumericalError("shooting Jacobian evaluation failed");
        }
        fill_residual(yj, Fj);
        for (int i = 0; i < n; ++i)
          J[std::size_t(i) * n + j] = (Fj[i] - F[i]) / d;
      }
    }

    Shooting out;
    out.coeff = std::move(c);
    out.rho = y[n];
    out.cond = cond_of(J, n);
    return out;
  }

  Attempt attempt(const Vec& x, const Vec& warm) const {
    Vec g = warm;
    if (g.empty()) {
      g.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - anchor_[i];
    }
    try {
      Shooting s = solve(x, std::move(g));
      Attempt a;
      a.ok = s.cond < opt_.cond_limit;
      a.coeff = std::move(s.coeff);
      return a;
    } catch (const Error&) {
      return {};
    }
  }

  ConeGeometry cone_;
  Vec anchor_;
  FrameOptions opt_;
  double rho0_ = 1.0;
  double mu_ = 1.0;               // unit-volume rescale of the anchor frame
  std::vector<double> basis_;     // columns: rescaled anchor vectors e_i
  std::vector<double> basis_inv_;
  mutable std::map<Vec, Shooting> cache_;
  mutable double radius_ = -1.0;
  mutable std::mutex lock_;
};

}  // namespace ptrac
