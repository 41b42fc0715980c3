#include "ptrac/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace {

using ptrac::GType;
using ptrac::ModelTensor;
using ptrac::TensorFamily;
using ptrac::Vec;

Vec mat_vec(const std::vector<double>& M, const Vec& X) {
  const int N = int(X.size());
  Vec out(N, 0.0);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) out[a] += M[std::size_t(a) * N + b] * X[b];
  return out;
}

std::vector<double> random_invertible(ptrac::Rng& rng, int N) {
  for (;;) {
    std::vector<double> M(std::size_t(N) * N);
    for (double& m : M) m = rng.uniform(-1.0, 1.0);
    if (std::fabs(ptrac::det(M, N)) >= 0.05) return M;
  }
}

std::vector<double> random_unimodular(ptrac::Rng& rng, int N) {
  std::vector<double> M = random_invertible(rng, N);
  const double s = std::pow(std::fabs(ptrac::det(M, N)), -1.0 / N);
  for (double& m : M) m *= s;
  return M;
}

// upper triangular with positive diagonal: fixes the ray through e0
std::vector<double> ray_stabilizer(ptrac::Rng& rng, int N) {
  std::vector<double> M(std::size_t(N) * N, 0.0);
  for (int a = 0; a < N; ++a) {
    M[std::size_t(a) * N + a] = rng.uniform(0.3, 2.0);
    for (int b = a + 1; b < N; ++b)
      M[std::size_t(a) * N + b] = rng.uniform(-1.0, 1.0);
  }
  return M;
}

Vec random_ray(ptrac::Rng& rng, int N) {
  for (;;) {
    Vec X(N);
    double m = 0;
    for (double& c : X) {
      c = rng.uniform(-1.0, 1.0);
      m = std::max(m, std::fabs(c));
    }
    if (m > 0.1) return X;
  }
}

ModelTensor ball_quadric() {
  return ModelTensor::sym2(3, {-1, 0, 0, 0, 1, 0, 0, 0, 1});
}

ModelTensor wedge(int i, int j, int N) {
  std::vector<double> K(std::size_t(N) * N, 0.0);
  K[std::size_t(i) * N + j] = 1.0;
  K[std::size_t(j) * N + i] = -1.0;
  return ModelTensor::skew2(N, std::move(K));
}

ModelTensor sym_product(const Vec& a, const Vec& b) {
  const int N = int(a.size());
  std::vector<double> S(std::size_t(N) * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      S[std::size_t(i) * N + j] = a[i] * b[j] + b[i] * a[j];
  return ModelTensor::sym2(N, std::move(S));
}

ModelTensor monomial_cubic(int N) {
  std::vector<double> H(std::size_t(N) * N * N, 0.0);
  H[0] = 1.0;  // (X^0)^3
  return ModelTensor::symk(N, 3, std::move(H));
}

ModelTensor fermat_cubic() {
  std::vector<double> H(27, 0.0);
  H[0] = 1.0;   // (0,0,0)
  H[13] = 1.0;  // (1,1,1)
  H[26] = 1.0;  // (2,2,2)
  return ModelTensor::symk(3, 3, std::move(H));
}

std::string label(const ModelTensor& I, const Vec& X) {
  return ptrac::p_type(I, X).text;
}

}  // namespace

TEST(Model, SaturationContractsTheFirstBlock) {
  const Vec q = ptrac::polynomial_system(ModelTensor::covector({1, -2, 0.5}),
                                         {2, 1, 4});
  ASSERT_EQ(q.size(), 1u);
  EXPECT_DOUBLE_EQ(q[0], 2.0);

  const ModelTensor H = ball_quadric();
  EXPECT_DOUBLE_EQ(ptrac::polynomial_system(H, {1, 0, 0})[0], -1.0);
  EXPECT_DOUBLE_EQ(ptrac::polynomial_system(H, {1, 1, 0})[0], 0.0);

  const ModelTensor K = wedge(0, 1, 3);
  const Vec kq = ptrac::polynomial_system(K, {1, 0, 0});
  ASSERT_EQ(kq.size(), 3u);
  EXPECT_DOUBLE_EQ(kq[0], 0.0);
  EXPECT_DOUBLE_EQ(kq[1], 1.0);
  EXPECT_DOUBLE_EQ(kq[2], 0.0);

  // the saturated skew system satisfies X^A K_AB X^B = 0 identically
  ptrac::Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelTensor KC = ptrac::pullback(K, random_invertible(rng, 3));
    const Vec X = random_ray(rng, 3);
    const Vec v = ptrac::polynomial_system(KC, X);
    double pair = 0;
    for (int b = 0; b < 3; ++b) pair += v[b] * X[b];
    EXPECT_LT(std::fabs(pair), 1e-12);
  }

  EXPECT_DOUBLE_EQ(
      ptrac::polynomial_system(monomial_cubic(3), {2, 0.5, -1})[0], 8.0);

  const Vec pq = ptrac::polynomial_system(
      ModelTensor::pair({1, 0, 0}, {0, 1, 2}), {3, 1, 1});
  ASSERT_EQ(pq.size(), 2u);
  EXPECT_DOUBLE_EQ(pq[0], 3.0);
  EXPECT_DOUBLE_EQ(pq[1], 3.0);

  EXPECT_THROW(ptrac::polynomial_system(H, {0, 0, 0}), ptrac::ValidationError);
  EXPECT_THROW(ptrac::polynomial_system(H, {1, 0}), ptrac::ValidationError);
}

TEST(Model, GTypeReadsSignatureRankAndSpan) {
  const GType ball = ptrac::g_type(ball_quadric());
  EXPECT_FALSE(ball.zero);
  EXPECT_EQ(ball.pos, 2);
  EXPECT_EQ(ball.neg, 1);
  EXPECT_EQ(ball.kernel, 0);

  // S = I1 (x) I2 + I2 (x) I1 with independent covectors: signature (1,1)
  const GType degen =
      ptrac::g_type(sym_product({1, 0, 0, 0}, {0, 1, 0, 0}));
  EXPECT_EQ(degen.pos, 1);
  EXPECT_EQ(degen.neg, 1);
  EXPECT_EQ(degen.kernel, 2);

  EXPECT_EQ(ptrac::g_type(wedge(0, 1, 4)).rank, 2);

  EXPECT_EQ(ptrac::g_type(ModelTensor::pair({1, 0, 0}, {0, 1, 0})).span, 2);
  EXPECT_EQ(ptrac::g_type(ModelTensor::pair({1, 0, 0}, {2, 0, 0})).span, 1);

  EXPECT_TRUE(ptrac::g_type(ModelTensor::covector({0, 0, 0})).zero);
  EXPECT_FALSE(ptrac::g_type(ModelTensor::covector({0, 1e-3, 0})).zero);

  const GType zsym = ptrac::g_type(ModelTensor::sym2(3, std::vector<double>(9, 0.0)));
  EXPECT_TRUE(zsym.zero);
  EXPECT_EQ(zsym.kernel, 3);

  EXPECT_FALSE(ptrac::g_type(monomial_cubic(3)).zero);
  EXPECT_TRUE(
      ptrac::g_type(ModelTensor::symk(3, 3, std::vector<double>(27, 0.0)))
          .zero);

  // SymK with k = 2 carries the quadratic invariants
  const GType promoted = ptrac::g_type(
      ModelTensor::symk(3, 2, {-1, 0, 0, 0, 1, 0, 0, 0, 1}));
  EXPECT_EQ(promoted.pos, 2);
  EXPECT_EQ(promoted.neg, 1);
}

TEST(Model, GTypeIsUnimodularInvariant) {
  ptrac::Rng rng(42);
  const ModelTensor cases[] = {
      ball_quadric(),
      sym_product({1, 0, 0, 0}, {0, 1, 0, 0}),
      wedge(0, 1, 4),
      ModelTensor::covector({0.3, -1, 0.7}),
      ModelTensor::pair({1, 0, 0, 0}, {0, 1, -1, 0}),
      monomial_cubic(3),
  };
  for (const ModelTensor& I : cases) {
    const GType base = ptrac::g_type(I);
    for (int trial = 0; trial < 50; ++trial) {
      const GType moved =
          ptrac::g_type(ptrac::pullback(I, random_unimodular(rng, I.N)));
      EXPECT_EQ(moved, base);
    }
  }
}

TEST(Model, PTypeLabelsRays) {
  const ModelTensor H = ball_quadric();
  EXPECT_EQ(label(H, {1, 0, 0}), "-");
  EXPECT_EQ(label(H, {0, 1, 0}), "+");
  EXPECT_EQ(label(H, {1, 1, 0}), "0");

  const ModelTensor I = ModelTensor::covector({1, 0, 0});
  EXPECT_EQ(label(I, {1, 0, 0}), "+");
  EXPECT_EQ(label(I, {0, 1, 0}), "0");
  EXPECT_EQ(label(I, {-1, 0, 0}), "-");

  const ModelTensor K = wedge(0, 1, 3);
  EXPECT_EQ(label(K, {1, 0, 0}), "k!=0");
  EXPECT_EQ(label(K, {0, 0, 1}), "k=0");

  const ModelTensor P = ModelTensor::pair({1, 0, 0}, {0, 1, 0});
  EXPECT_EQ(label(P, {0, 0, 1}), "{1,2}");
  EXPECT_EQ(label(P, {1, 0, 0}), "{2}");
  EXPECT_EQ(label(P, {0, 1, 0}), "{1}");
  EXPECT_EQ(label(P, {1, 1, 0}), "{}");

  const ModelTensor C = monomial_cubic(3);
  EXPECT_EQ(label(C, {2, 0, 0}), "+");
  EXPECT_EQ(label(C, {-1, 3, 0}), "-");
  EXPECT_EQ(label(C, {0, 1, 0}), "0");
}

TEST(Model, PTypeIsStabilizerInvariant) {
  ptrac::Rng rng(42);
  const Vec e0 = {1, 0, 0};
  const ModelTensor cases[] = {
      ball_quadric(),
      ModelTensor::covector({1, 0.3, 0}),
      wedge(0, 1, 3),
      wedge(1, 2, 3),
      ModelTensor::pair({1, 0, 0}, {0, 1, 0}),
      ModelTensor::pair({0, 1, 0}, {0, 0, 1}),
      monomial_cubic(3),
  };
  for (const ModelTensor& I : cases) {
    const std::string base = label(I, e0);
    for (int trial = 0; trial < 50; ++trial) {
      const ModelTensor moved = ptrac::pullback(I, ray_stabilizer(rng, 3));
      EXPECT_EQ(label(moved, e0), base);
    }
  }
}

TEST(Model, IndefiniteSignatureYieldsAllThreeLabelsOnRays) {
  ptrac::Rng rng(42);
  const ModelTensor H = ball_quadric();
  int plus = 0, minus = 0, zero = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::string t = label(H, random_ray(rng, 3));
    if (t == "+") ++plus;
    if (t == "-") ++minus;
    if (t == "0") ++zero;
  }
  EXPECT_EQ(plus + minus + zero, 10000);
  EXPECT_GT(plus, 500);
  EXPECT_GT(minus, 500);

  // the band around the cone carries the zero label: exact and within 1e-9
  EXPECT_EQ(label(H, {1, 1, 0}), "0");
  EXPECT_EQ(label(H, {1, 1 + 4e-10, 0}), "0");
  EXPECT_EQ(label(H, {1, 1 + 4e-9, 0}), "+");

  // definite quadric: a single label
  const ModelTensor D = ModelTensor::sym2(3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  for (int trial = 0; trial < 100; ++trial)
    EXPECT_EQ(label(D, random_ray(rng, 3)), "+");
}

TEST(Model, ZeroLocusSmoothness) {
  const ModelTensor H = ball_quadric();
  EXPECT_TRUE(ptrac::zero_locus_smooth(H, {1, 1, 0}));
  EXPECT_TRUE(ptrac::zero_locus_smooth(H, {1, 0, 1}));
  EXPECT_TRUE(ptrac::zero_locus_smooth(H, {1, 0.6, 0.8}));
  EXPECT_THROW(ptrac::zero_locus_smooth(H, {0, 1, 0}), ptrac::ValidationError);

  // product of hyperplanes: smooth on one sheet, singular where they meet
  const ModelTensor S = sym_product({1, 0, 0}, {0, 1, 0});
  EXPECT_TRUE(ptrac::zero_locus_smooth(S, {0, 1, 0}));
  EXPECT_FALSE(ptrac::zero_locus_smooth(S, {0, 0, 1}));

  EXPECT_TRUE(
      ptrac::zero_locus_smooth(ModelTensor::covector({1, 0, 0}), {0, 1, 0.3}));

  EXPECT_TRUE(ptrac::zero_locus_smooth(wedge(0, 1, 4), {0, 0, 1, 0}));
  // symplectic form: empty locus, every probe is off it
  std::vector<double> J(16, 0.0);
  J[0 * 4 + 1] = 1.0;
  J[1 * 4 + 0] = -1.0;
  J[2 * 4 + 3] = 1.0;
  J[3 * 4 + 2] = -1.0;
  EXPECT_THROW(ptrac::zero_locus_smooth(ModelTensor::skew2(4, J), {1, 0, 0, 0}),
               ptrac::ValidationError);

  const ModelTensor P = ModelTensor::pair({1, 0, 0}, {0, 1, 0});
  EXPECT_TRUE(ptrac::zero_locus_smooth(P, {0, 0, 1}));
  EXPECT_TRUE(ptrac::zero_locus_smooth(P, {0, 1, 0}));
  // a repeated hyperplane meets itself non-transversally
  EXPECT_FALSE(ptrac::zero_locus_smooth(
      ModelTensor::pair({1, 0, 0}, {2, 0, 0}), {0, 1, 0}));

  // triple hyperplane: gradient vanishes on the whole locus
  EXPECT_FALSE(ptrac::zero_locus_smooth(monomial_cubic(3), {0, 1, 0}));
  EXPECT_TRUE(ptrac::zero_locus_smooth(fermat_cubic(), {1, -1, 0}));
}

TEST(Model, ConstructionValidatesSymmetryAndDegree) {
  EXPECT_THROW(ModelTensor::sym2(2, {0, 1, 2, 0}), ptrac::ValidationError);
  EXPECT_THROW(ModelTensor::skew2(2, {1, 1, -1, 0}), ptrac::ValidationError);
  EXPECT_THROW(ModelTensor::skew2(2, {0, 1, -0.5, 0}), ptrac::ValidationError);

  try {
    ModelTensor::symk(3, 5, std::vector<double>(243, 0.0));
    FAIL() << "degree 5 must be rejected";
  } catch (const ptrac::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("5"), std::string::npos);
  }
  EXPECT_THROW(ModelTensor::symk(3, 0, {}), ptrac::ValidationError);

  std::vector<double> bad(27, 0.0);
  bad[0 * 9 + 0 * 3 + 1] = 1.0;  // H_{001} set without its mirrors
  EXPECT_THROW(ModelTensor::symk(3, 3, std::move(bad)), ptrac::ValidationError);

  EXPECT_THROW(ModelTensor::sym2(3, std::vector<double>(8, 0.0)),
               ptrac::ValidationError);
  EXPECT_THROW(ModelTensor::symk(3, 2, std::vector<double>(10, 0.0)),
               ptrac::ValidationError);
  EXPECT_THROW(ModelTensor::covector({1}), ptrac::ValidationError);
  EXPECT_THROW(ModelTensor::pair({1, 0, 0}, {1, 0}), ptrac::ValidationError);
  EXPECT_THROW(ptrac::pullback(ball_quadric(), std::vector<double>(6, 0.0)),
               ptrac::ValidationError);
}

TEST(Model, PullbackRespectsContraction) {
  ptrac::Rng rng(42);
  const ModelTensor cases[] = {
      ModelTensor::covector({1, -2, 0.5}),
      ball_quadric(),
      fermat_cubic(),
      ModelTensor::pair({1, 0, 0}, {0, 1, 2}),
  };
  for (const ModelTensor& I : cases) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::vector<double> M = random_invertible(rng, I.N);
      const Vec X = random_ray(rng, I.N);
      const Vec q1 = ptrac::polynomial_system(ptrac::pullback(I, M), X);
      const Vec q2 = ptrac::polynomial_system(I, mat_vec(M, X));
      ASSERT_EQ(q1.size(), q2.size());
      for (std::size_t i = 0; i < q1.size(); ++i)
        EXPECT_NEAR(q1[i], q2[i], 1e-11);
    }
  }

  // the skew system keeps a free slot, which transforms by M transpose
  const ModelTensor K = wedge(0, 1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> M = random_invertible(rng, 3);
    const Vec X = random_ray(rng, 3);
    const Vec q1 = ptrac::polynomial_system(ptrac::pullback(K, M), X);
    const Vec q2 = ptrac::polynomial_system(K, mat_vec(M, X));
    for (int b = 0; b < 3; ++b) {
      double want = 0;
      for (int d = 0; d < 3; ++d) want += q2[d] * M[std::size_t(d) * 3 + b];
      EXPECT_NEAR(q1[b], want, 1e-11);
    }
  }

  // identity map leaves components untouched
  std::vector<double> id(9, 0.0);
  id[0] = id[4] = id[8] = 1.0;
  const ModelTensor back = ptrac::pullback(ball_quadric(), id);
  for (int i = 0; i < 9; ++i)
    EXPECT_DOUBLE_EQ(back.comp[i], ball_quadric().comp[i]);
}
