#pragma once

// Dense linear algebra for the tiny systems this engine meets (dimension
// <= ~10): LU solves, inverses, determinants, cyclic Jacobi eigenvalues,
// tolerance-based rank.  Matrices are row-major std::vector<double>.
// A jet-valued Gauss-Jordan inverse supports deriving connection
// coefficients from metric jets.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ptrac/core.hpp"
#include "ptrac/jet.hpp"

namespace ptrac {

inline double& at(std::vector<double>& m, int n, int i, int j) {
  return m[std::size_t(i) * n + j];
}
inline double at(const std::vector<double>& m, int n, int i, int j) {
  return m[std::size_t(i) * n + j];
}

// Solve A x = b in place (A destroyed); partial pivoting.
inline Vec lu_solve(std::vector<double> A, Vec b, int n) {
  assert(int(b.size()) == n && int(A.size()) == n * n && "lu shape");
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(at(A, n, r, col)) > std::fabs(at(A, n, piv, col))) piv = r;
    if (at(A, n, piv, col) == 0.0)
      throw NumericalError("singular linear system");
    if (piv != col) {
      for (int j = 0; j < n; ++j)
        std::swap(at(A, n, col, j), at(A, n, piv, j));
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = at(A, n, r, col) / at(A, n, col, col);
      for (int j = col; j < n; ++j) at(A, n, r, j) -= f * at(A, n, col, j);
      b[r] -= f * b[col];
    }
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= at(A, n, i, j) * x[j];
    x[i] = s / at(A, n, i, i);
  }
  return x;
}

inline std::vector<double> invert(std::vector<double> A, int n) {
  std::vector<double> inv(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) at(inv, n, i, i) = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(at(A, n, r, col)) > std::fabs(at(A, n, piv, col))) piv = r;
    if (at(A, n, piv, col) == 0.0) throw NumericalError("singular matrix");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(at(A, n, col, j), at(A, n, piv, j));
        std::swap(at(inv, n, col, j), at(inv, n, piv, j));
      }
    const double d = at(A, n, col, col);
    for (int j = 0; j < n; ++j) {
      at(A, n, col, j) /= d;
      at(inv, n, col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = at(A, n, r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        at(A, n, r, j) -= f * at(A, n, col, j);
        at(inv, n, r, j) -= f * at(inv, n, col, j);
      }
    }
  }
  return inv;
}

inline double det(std::vector<double> A, int n) {
  double d = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(at(A, n, r, col)) > std::fabs(at(A, n, piv, col))) piv = r;
    if (at(A, n, piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (int j = 0; j < n; ++j)
        std::swap(at(A, n, col, j), at(A, n, piv, j));
      d = -d;
    }
    d *= at(A, n, col, col);
    for (int r = col + 1; r < n; ++r) {
      double f = at(A, n, r, col) / at(A, n, col, col);
      for (int j = col; j < n; ++j) at(A, n, r, j) -= f * at(A, n, col, j);
    }
  }
  return d;
}

// Gauss-Jordan inverse over jet-valued entries; pivoting on |value()|.
inline std::vector<Jet> invert_jet_matrix(std::vector<Jet> A, int n) {
  assert(int(A.size()) == n * n && "jet matrix shape");
  const int dim = A[0].dim(), order = A[0].order();
  std::vector<Jet> inv(std::size_t(n) * n, Jet::constant(dim, order, 0.0));
  for (int i = 0; i < n; ++i) inv[std::size_t(i) * n + i] = Jet::constant(dim, order, 1.0);
  auto a = [&](int i, int j) -> Jet& { return A[std::size_t(i) * n + j]; };
  auto b = [&](int i, int j) -> Jet& { return inv[std::size_t(i) * n + j]; };
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col).value()) > std::fabs(a(piv, col).value())) piv = r;
    if (a(piv, col).value() == 0.0)
      throw NumericalError("metric not invertible at evaluation point");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(col, j), a(piv, j));
        std::swap(b(col, j), b(piv, j));
      }
    Jet d = a(col, col).reciprocal();
    for (int j = 0; j < n; ++j) {
      a(col, j) = a(col, j) * d;
      b(col, j) = b(col, j) * d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = a(r, col);
      if (f.value() == 0.0 && f.order() == 0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        b(r, j) -= f * b(col, j);
      }
    }
  }
  return inv;
}

// Cyclic Jacobi for symmetric matrices; returns eigenvalues ascending.
// If evecs != nullptr it receives the orthonormal eigenvectors as columns.
inline Vec jacobi_eigenvalues(std::vector<double> A, int n,
                              std::vector<double>* evecs = nullptr) {
  std::vector<double> V(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) at(V, n, i, i) = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += sqr(at(A, n, p, q));
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(A, n, p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (at(A, n, q, q) - at(A, n, p, p)) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(A, n, k, p), akq = at(A, n, k, q);
          at(A, n, k, p) = c * akp - s * akq;
          at(A, n, k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(A, n, p, k), aqk = at(A, n, q, k);
          at(A, n, p, k) = c * apk - s * aqk;
          at(A, n, q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = at(V, n, k, p), vkq = at(V, n, k, q);
          at(V, n, k, p) = c * vkp - s * vkq;
          at(V, n, k, q) = s * vkp + c * vkq;
        }
      }
  }
  Vec ev(n);
  for (int i = 0; i < n; ++i) ev[i] = at(A, n, i, i);
  // sort ascending, carrying eigenvector columns along
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a_, int b_) { return ev[a_] < ev[b_]; });
  Vec sorted(n);
  std::vector<double> Vs(std::size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    sorted[i] = ev[idx[i]];
    for (int k = 0; k < n; ++k) at(Vs, n, k, i) = at(V, n, k, idx[i]);
  }
  if (evecs) *evecs = Vs;
  return sorted;
}

struct Signature {
  int pos = 0, neg = 0, zero = 0;
  bool operator==(const Signature&) const = default;
};

// Eigenvalue signs of a symmetric matrix, with |lambda| <= band counted as 0.
inline Signature signature_of(const std::vector<double>& sym, int n, double band) {
  Vec ev = jacobi_eigenvalues(sym, n);
  Signature s;
  for (double v : ev) {
    if (v > band) ++s.pos;
    else if (v < -band) ++s.neg;
    else ++s.zero;
  }
  return s;
}

// Numerical rank by row echelon with threshold relative to the largest entry.
inline int rank_of(std::vector<double> A, int rows, int cols, double tol) {
  double scale = 0;
  for (double v : A) scale = std::max(scale, std::fabs(v));
  if (scale == 0) return 0;
  const double eps = tol * scale;
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int piv = -1;
    double best = eps;
    for (int r = rank; r < rows; ++r)
      if (std::fabs(A[std::size_t(r) * cols + col]) > best) {
        best = std::fabs(A[std::size_t(r) * cols + col]);
        piv = r;
      }
    if (piv < 0) continue;
    for (int j = 0; j < cols; ++j)
      std::swap(A[std::size_t(rank) * cols + j], A[std::size_t(piv) * cols + j]);
    const double d = A[std::size_t(rank) * cols + col];
    for (int r = 0; r < rows; ++r) {
      if (r == rank) continue;
      const double f = A[std::size_t(r) * cols + col] / d;
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j)
        A[std::size_t(r) * cols + j] -= f * A[std::size_t(rank) * cols + j];
    }
    ++rank;
  }
  return rank;
}

}  // namespace ptrac
