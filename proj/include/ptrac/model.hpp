#pragma once

// Constant tensors on the (n+1)-dimensional slot space in the supported
// symmetry families, the polynomial systems obtained by saturating them with
// a ray, coarse orbit invariants (G-type), ray labels (P-type) with a zero
// band of 1e-9, and a smoothness test for the saturated zero locus.  Storage
// is dense row-major over slot indices; Pair holds its two covectors stacked.
// Declared symmetries must hold exactly and are enforced at construction.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ptrac/bgg.hpp"
#include "ptrac/core.hpp"
#include "ptrac/linalg.hpp"

namespace ptrac {

struct ModelTensor {
  TensorFamily family = TensorFamily::Covector;
  int N = 0;  // slot-space dimension
  int k = 1;  // symmetric degree (SymK); 1 or 2 for the fixed families
  std::vector<double> comp;

  static ModelTensor covector(Vec I) {
    if (I.size() < 2) throw ValidationError("covector needs dimension >= 2");
    ModelTensor t;
    t.family = TensorFamily::Covector;
    t.N = int(I.size());
    t.k = 1;
    t.comp = std::move(I);
    return t;
  }

  static ModelTensor sym2(int N, std::vector<double> H) {
    check_square(N, H, "symmetric");
    for (int a = 0; a < N; ++a)
      for (int b = a + 1; b < N; ++b)
        if (H[std::size_t(a) * N + b] != H[std::size_t(b) * N + a])
          throw ValidationError("symmetric tensor data is not symmetric");
    ModelTensor t;
    t.family = TensorFamily::Sym2;
    t.N = N;
    t.k = 2;
    t.comp = std::move(H);
    return t;
  }

  static ModelTensor skew2(int N, std::vector<double> K) {
    check_square(N, K, "antisymmetric");
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b)
        if (K[std::size_t(a) * N + b] != -K[std::size_t(b) * N + a])
          throw ValidationError("antisymmetric tensor data is not antisymmetric");
    ModelTensor t;
    t.family = TensorFamily::Skew2;
    t.N = N;
    t.k = 2;
    t.comp = std::move(K);
    return t;
  }

  static ModelTensor symk(int N, int k, std::vector<double> H) {
    if (k < 1 || k > 4)
      throw ValidationError("unsupported symmetric degree " +
                            std::to_string(k) + "; families stop at degree 4");
    if (N < 2) throw ValidationError("tensor needs dimension >= 2");
    std::size_t want = 1;
    for (int i = 0; i < k; ++i) want *= std::size_t(N);
    if (H.size() != want)
      throw ValidationError("symmetric degree-" + std::to_string(k) +
                            " tensor needs " + std::to_string(want) +
                            " components");
    // exact symmetry: every index string must match its sorted representative
    std::vector<int> idx(k);
    for (std::size_t flat = 0; flat < want; ++flat) {
      std::size_t rest = flat;
      for (int j = k - 1; j >= 0; --j) {
        idx[j] = int(rest % N);
        rest /= N;
      }
      std::vector<int> sorted = idx;
      std::sort(sorted.begin(), sorted.end());
      std::size_t canon = 0;
      for (int j = 0; j < k; ++j) canon = canon * N + std::size_t(sorted[j]);
      if (H[flat] != H[canon])
        throw ValidationError("symmetric tensor data is not symmetric");
    }
    ModelTensor t;
    t.family = TensorFamily::SymK;
    t.N = N;
    t.k = k;
    t.comp = std::move(H);
    return t;
  }

  static ModelTensor pair(Vec I1, Vec I2) {
    if (I1.size() != I2.size() || I1.size() < 2)
      throw ValidationError("pair needs two covectors of equal dimension >= 2");
    ModelTensor t;
    t.family = TensorFamily::PairCovectors;
    t.N = int(I1.size());
    t.k = 1;
    t.comp = std::move(I1);
    t.comp.insert(t.comp.end(), I2.begin(), I2.end());
    return t;
  }

  int valence() const {
    return family == TensorFamily::PairCovectors ? 1 : k;
  }

 private:
  static void check_square(int N, const std::vector<double>& a,
                           const char* what) {
    if (N < 2) throw ValidationError("tensor needs dimension >= 2");
    if (int(a.size()) != N * N)
      throw ValidationError(std::string(what) + " tensor needs N*N components");
  }
};

struct PTypeLabel {
  TensorFamily family = TensorFamily::Covector;
  std::string text;  // "+", "0", "-", "k!=0", "k=0", "{}", "{1}", "{2}", "{1,2}"
  bool operator==(const PTypeLabel&) const = default;
};

struct GType {
  TensorFamily family = TensorFamily::Covector;
  bool zero = true;
  int pos = 0, neg = 0, kernel = 0;  // Sym2 and SymK with k = 2
  int rank = 0;                      // Skew2
  int span = 0;                      // PairCovectors
  bool operator==(const GType&) const = default;
};

namespace detail {

inline void check_ray(const ModelTensor& I, const Vec& X) {
  if (int(X.size()) != I.N)
    throw ValidationError("ray dimension does not match the tensor");
  double m = 0;
  for (double c : X) m = std::max(m, std::fabs(c));
  if (m == 0.0) throw ValidationError("the zero vector spans no ray");
}

// contraction of all but the last `keep` slots with X
inline Vec contract_leading(const std::vector<double>& comp, int N, int k,
                            int keep, const Vec& X) {
  std::vector<double> cur = comp;
  for (int stage = 0; stage < k - keep; ++stage) {
    const std::size_t block = cur.size() / std::size_t(N);
    std::vector<double> next(block, 0.0);
    for (int a = 0; a < N; ++a)
      for (std::size_t r = 0; r < block; ++r)
        next[r] += X[a] * cur[std::size_t(a) * block + r];
    cur = std::move(next);
  }
  return cur;
}

// label rules shared with the chart-side stratifier, which feeds saturated
// values read off a tractor field instead of a model contraction
inline PTypeLabel label_values(TensorFamily family, const Vec& q,
                               double band) {
  PTypeLabel out;
  out.family = family;
  switch (family) {
    case TensorFamily::Covector:
    case TensorFamily::Sym2:
    case TensorFamily::SymK:
      if (q.empty()) throw ValidationError("no saturated value to label");
      out.text = q[0] > band ? "+" : q[0] < -band ? "-" : "0";
      break;
    case TensorFamily::Skew2: {
      double m = 0;
      for (double c : q) m = std::max(m, std::fabs(c));
      out.text = m > band ? "k!=0" : "k=0";
      break;
    }
    case TensorFamily::PairCovectors: {
      if (q.size() != 2)
        throw ValidationError("pair labels need two saturated values");
      const bool z1 = std::fabs(q[0]) <= band, z2 = std::fabs(q[1]) <= band;
      out.text = z1 ? (z2 ? "{1,2}" : "{1}") : (z2 ? "{2}" : "{}");
      break;
    }
  }
  return out;
}

}  // namespace detail

// Saturated values Q(X): full contraction with X over the first symmetric
// block.  Covector and SymK give one value, Skew2 the covector X^A K_AB (the
// relation X^A K_AB X^B = 0 holds identically), Pair both pairings.
inline Vec polynomial_system(const ModelTensor& I, const Vec& X) {
  detail::check_ray(I, X);
  const int N = I.N;
  switch (I.family) {
    case TensorFamily::Covector:
      return {std::inner_product(X.begin(), X.end(), I.comp.begin(), 0.0)};
    case TensorFamily::Sym2:
    case TensorFamily::SymK:
      return detail::contract_leading(I.comp, N, I.k, 0, X);
    case TensorFamily::Skew2:
      return detail::contract_leading(I.comp, N, 2, 1, X);
    case TensorFamily::PairCovectors: {
      Vec out(2, 0.0);
      for (int a = 0; a < N; ++a) {
        out[0] += I.comp[a] * X[a];
        out[1] += I.comp[std::size_t(N) + a] * X[a];
      }
      return out;
    }
  }
  throw ValidationError("unknown tensor family");
}

// Coarse orbit invariants: zero flag everywhere; eigenvalue signature and
// kernel for the quadratic families, rank for Skew2, span dimension for a
// pair.  Degree >= 3 carries no further invariant here.
inline GType g_type(const ModelTensor& I, double band = 1e-9) {
  GType out;
  out.family = I.family;
  double m = 0;
  for (double c : I.comp) m = std::max(m, std::fabs(c));
  out.zero = m <= band;
  if (out.zero) {
    if (I.family == TensorFamily::Sym2 ||
        (I.family == TensorFamily::SymK && I.k == 2))
      out.kernel = I.N;
    return out;
  }
  switch (I.family) {
    case TensorFamily::Covector:
      break;
    case TensorFamily::Sym2:
    case TensorFamily::SymK: {
      if (I.k != 2) break;
      const Signature s = signature_of(I.comp, I.N, band);
      out.pos = s.pos;
      out.neg = s.neg;
      out.kernel = s.zero;
      break;
    }
    case TensorFamily::Skew2: {
      // rank via the Gram spectrum of K (singular values squared)
      std::vector<double> gram(std::size_t(I.N) * I.N, 0.0);
      for (int a = 0; a < I.N; ++a)
        for (int b = 0; b < I.N; ++b)
          for (int c = 0; c < I.N; ++c)
            gram[std::size_t(a) * I.N + b] +=
                I.comp[std::size_t(c) * I.N + a] *
                I.comp[std::size_t(c) * I.N + b];
      const Vec ev = jacobi_eigenvalues(gram, I.N);
      // band applies to the Gram spectrum relative to its top eigenvalue
      for (double v : ev)
        if (v > band * std::max(1.0, ev.back())) ++out.rank;
      break;
    }
    case TensorFamily::PairCovectors: {
      std::vector<double> gram(4, 0.0);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int a = 0; a < I.N; ++a)
            gram[std::size_t(i) * 2 + j] +=
                I.comp[std::size_t(i) * I.N + a] *
                I.comp[std::size_t(j) * I.N + a];
      const Vec ev = jacobi_eigenvalues(gram, 2);
      for (double v : ev)
        if (v > band * std::max(1.0, ev.back())) ++out.span;
      break;
    }
  }
  return out;
}

// Ray label from the sign or vanishing pattern of the saturated values.
// Signs are well defined on rays: the values scale by positive powers.
inline PTypeLabel p_type(const ModelTensor& I, const Vec& X,
                         double band = 1e-9) {
  return detail::label_values(I.family, polynomial_system(I, X), band);
}

// Pullback along a slot-space map M (row-major M[a*N+b] = M^a_b):
// (pullback I)(v, ...) = I(Mv, ...).  Symmetry is kept exact by computing
// canonical index strings and mirroring.
inline ModelTensor pullback(const ModelTensor& I,
                            const std::vector<double>& M) {
  const int N = I.N;
  if (int(M.size()) != N * N)
    throw ValidationError("pullback map must be N x N");
  auto transform_row = [&](const double* row) {
    Vec out(N, 0.0);
    for (int b = 0; b < N; ++b)
      for (int a = 0; a < N; ++a) out[b] += row[a] * M[std::size_t(a) * N + b];
    return out;
  };
  switch (I.family) {
    case TensorFamily::Covector:
      return ModelTensor::covector(transform_row(I.comp.data()));
    case TensorFamily::PairCovectors:
      return ModelTensor::pair(transform_row(I.comp.data()),
                               transform_row(I.comp.data() + N));
    default:
      break;
  }
  const int k = I.k;
  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= std::size_t(N);
  std::vector<double> out(total, 0.0);
  std::vector<int> idx(k), src(k);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int j = k - 1; j >= 0; --j) {
      idx[j] = int(rest % N);
      rest /= N;
    }
    // canonical representative: compute sorted strings once, mirror the rest
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    const bool canonical = sorted == idx || I.family == TensorFamily::Skew2;
    if (!canonical) {
      std::size_t canon = 0;
      for (int j = 0; j < k; ++j) canon = canon * N + std::size_t(sorted[j]);
      out[flat] = out[canon];
      continue;
    }
    double s = 0;
    std::fill(src.begin(), src.end(), 0);
    for (;;) {
      std::size_t f = 0;
      for (int j = 0; j < k; ++j) f = f * N + std::size_t(src[j]);
      double term = I.comp[f];
      for (int j = 0; j < k; ++j)
        term *= M[std::size_t(src[j]) * N + idx[j]];
      s += term;
      int j = k - 1;
      while (j >= 0 && ++src[j] == N) src[j--] = 0;
      if (j < 0) break;
    }
    out[flat] = s;
  }
  switch (I.family) {
    case TensorFamily::Sym2:
      return ModelTensor::sym2(N, std::move(out));
    case TensorFamily::Skew2: {
      // restore exact antisymmetry against roundoff
      for (int a = 0; a < N; ++a) {
        out[std::size_t(a) * N + a] = 0.0;
        for (int b = a + 1; b < N; ++b) {
          const double v = 0.5 * (out[std::size_t(a) * N + b] -
                                  out[std::size_t(b) * N + a]);
          out[std::size_t(a) * N + b] = v;
          out[std::size_t(b) * N + a] = -v;
        }
      }
      return ModelTensor::skew2(N, std::move(out));
    }
    default:
      return ModelTensor::symk(N, k, std::move(out));
  }
}

// Smoothness of the saturated zero locus at X: rank of the constraint
// Jacobian, with rows projected off the Euler direction, compared against
// the family's expected codimension (Covector, Sym2, SymK: 1; Skew2: 2;
// Pair: the number of constraints vanishing at X).
inline bool zero_locus_smooth(const ModelTensor& I, const Vec& X,
                              double band = 1e-9) {
  detail::check_ray(I, X);
  const int N = I.N;
  const Vec q = polynomial_system(I, X);

  std::vector<Vec> rows;
  int expected = 0;
  switch (I.family) {
    case TensorFamily::Covector:
      if (std::fabs(q[0]) > band)
        throw ValidationError("point is not on the zero locus");
      rows.push_back(Vec(I.comp.begin(), I.comp.end()));
      expected = 1;
      break;
    case TensorFamily::Sym2:
    case TensorFamily::SymK: {
      if (std::fabs(q[0]) > band)
        throw ValidationError("point is not on the zero locus");
      Vec grad = detail::contract_leading(I.comp, N, I.k, 1, X);
      for (double& g : grad) g *= double(I.k);
      rows.push_back(std::move(grad));
      expected = 1;
      break;
    }
    case TensorFamily::Skew2: {
      double m = 0;
      for (double c : q) m = std::max(m, std::fabs(c));
      if (m > band) throw ValidationError("point is not on the zero locus");
      for (int b = 0; b < N; ++b) {
        Vec row(N);
        for (int c = 0; c < N; ++c) row[c] = I.comp[std::size_t(c) * N + b];
        rows.push_back(std::move(row));
      }
      expected = 2;
      break;
    }
    case TensorFamily::PairCovectors: {
      for (int i = 0; i < 2; ++i)
        if (std::fabs(q[i]) <= band)
          rows.push_back(Vec(I.comp.begin() + i * N,
                             I.comp.begin() + (i + 1) * N));
      if (rows.empty())
        throw ValidationError("point is not on the zero locus");
      expected = int(rows.size());
      break;
    }
  }

  double x2 = 0;
  for (double c : X) x2 += c * c;
  for (Vec& r : rows) {
    double rx = 0;
    for (int a = 0; a < N; ++a) rx += r[a] * X[a];
    for (int a = 0; a < N; ++a) r[a] -= rx / x2 * X[a];
  }
  const int m = int(rows.size());
  std::vector<double> gram(std::size_t(m) * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int a = 0; a < N; ++a)
        gram[std::size_t(i) * m + j] += rows[i][a] * rows[j][a];
  const Vec ev = jacobi_eigenvalues(gram, m);
  int rank = 0;
  for (double v : ev)
    if (v > band * std::max(1.0, ev.back())) ++rank;
  return rank == expected;
}

}  // namespace ptrac
