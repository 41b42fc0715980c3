#include "ptrac/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support/fd.hpp"

using ptrac::EvalError;
using ptrac::Jet;
using ptrac::ParseError;
using ptrac::parse_field;
using ptrac::ScalarField;
using ptrac::Vec;

namespace {

// Relative comparison with unit floor: |a - b| <= tol * max(1, |b|).
void expect_close(double a, double b, double tol) {
  EXPECT_LE(std::fabs(a - b), tol * std::max(1.0, std::fabs(b)))
      << "got " << a << " want " << b;
}

TEST(Expr, ValuesAndPrecedence) {
  ScalarField f = parse_field("1 + 2*3 - 4/2", 1);
  EXPECT_EQ(f.value({0.0}), 5.0);
  EXPECT_EQ(parse_field("-x1^2", 1).value({3.0}), -9.0);       // -(x^2)
  EXPECT_EQ(parse_field("(0 - x1)^2", 1).value({3.0}), 9.0);
  EXPECT_EQ(parse_field("2^3", 1).value({0.0}), 8.0);
  EXPECT_EQ(parse_field("x1^-2", 1).value({2.0}), 0.25);
  EXPECT_EQ(parse_field("x2", 3).value({1.0, 7.0, 9.0}), 7.0);
  EXPECT_NEAR(parse_field("sin(x1)*exp(x2)", 2).value({0.5, 0.25}),
              std::sin(0.5) * std::exp(0.25), 1e-15);
}

// Derivative orders 1..3 match central finite differences at step 1e-4 to
// relative error 1e-6.  Each order is differenced against the exact jet one
// order below; direct third-order differencing of values drowns in roundoff
// at this step size, the cascaded version is the meaningful oracle.
TEST(Expr, JetsMatchFiniteDifferences) {
  const double h = 1e-4, tol = 1e-6;
  std::vector<std::string> texts = {
      "sin(x1)*exp(x2) + x1^3/(1 + x2^2)",
      "sqrt(1 + x1^2 + x2^2)",
      "log(2 + x1) * cos(x2)",
      "(x1 - x2)^4 + x1*x2",
  };
  ptrac::Rng rng(42);
  for (const auto& text : texts) {
    ScalarField f = parse_field(text, 2);
    for (int rep = 0; rep < 5; ++rep) {
      Vec x = rng.box_point(2, 0.9);
      Jet j3 = f.jet(x, 3);

      for (int i = 0; i < 2; ++i) {
        double fd = ptrac::testing::fd_partial(
            [&](const Vec& y) { return f.value(y); }, x, i, h);
        expect_close(fd, j3.d1(i), tol);
        for (int k = 0; k < 2; ++k) {
          double fd2 = ptrac::testing::fd_partial(
              [&](const Vec& y) { return f.jet(y, 1).d1(i); }, x, k, h);
          expect_close(fd2, j3.d2(i, k), tol);
          for (int m = 0; m < 2; ++m) {
            double fd3 = ptrac::testing::fd_partial(
                [&](const Vec& y) { return f.jet(y, 2).d2(i, k); }, x, m, h);
            expect_close(fd3, j3.d3(i, k, m), tol);
          }
        }
      }
    }
  }
}

TEST(Expr, PrintParseRoundTrip) {
  std::vector<std::string> texts = {
      "x1 + x2*x3 - x1/x3",
      "-x1^2 + sin(cos(x2))",
      "sqrt(x1^2 + 1)/(1 - x2)^3",
      "x1^-2 + 2.5e-3",
      "log(exp(x1)) - (x2 - x3) - x1",
  };
  ptrac::Rng rng(7);
  for (const auto& text : texts) {
    ScalarField f = parse_field(text, 3);
    std::string printed = f.to_string();
    ScalarField g = parse_field(printed, 3);
    // printing is idempotent
    EXPECT_EQ(printed, g.to_string());
    for (int rep = 0; rep < 10; ++rep) {
      Vec x = rng.box_point(3, 0.8);
      EXPECT_EQ(f.value(x), g.value(x)) << text;
    }
  }
}

TEST(Expr, ParseErrorsCarryPositions) {
  try {
    parse_field("x1 + * x2", 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset, 5);
    EXPECT_NE(std::string(e.what()).find("*"), std::string::npos);
  }

  EXPECT_THROW(parse_field("x3", 2), ParseError);        // out of range
  EXPECT_THROW(parse_field("foo(x1)", 2), ParseError);   // unknown function
  EXPECT_THROW(parse_field("y + 1", 2), ParseError);     // unknown identifier
  EXPECT_THROW(parse_field("x1^2.5", 2), ParseError);    // integer exponents only
  EXPECT_THROW(parse_field("x1^x2", 2), ParseError);
  EXPECT_THROW(parse_field("(x1", 2), ParseError);
  EXPECT_THROW(parse_field("x1 x2", 2), ParseError);
  EXPECT_THROW(parse_field("sin(x1, x2)", 2), ParseError);
  EXPECT_THROW(parse_field("x1^2^3", 2), ParseError);
}

TEST(Expr, EvaluationSingularities) {
  ScalarField div = parse_field("x1/(x2 - x2)", 2);
  try {
    div.value({1.0, 2.0});
    FAIL() << "expected EvalError";
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("division by zero"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
  EXPECT_THROW(parse_field("log(0 - x1)", 1).value({1.0}), EvalError);
  EXPECT_THROW(parse_field("sqrt(0 - x1)", 1).value({1.0}), EvalError);
  EXPECT_THROW(parse_field("x1^-1", 1).value({0.0}), EvalError);
  // sqrt at exactly zero: value fine, first derivative singular
  ScalarField sq = parse_field("sqrt(x1)", 1);
  EXPECT_EQ(sq.value({0.0}), 0.0);
  EXPECT_THROW(sq.jet({0.0}, 1), EvalError);
}

TEST(Expr, DeterministicEvaluation) {
  ScalarField f = parse_field("sin(x1)*exp(x2) + sqrt(1 + x1^2)", 2);
  Vec x = {0.3121, -0.777};
  double a = f.value(x), b = f.value(x);
  EXPECT_EQ(a, b);
  Jet ja = f.jet(x, 3), jb = f.jet(x, 3);
  EXPECT_EQ(ja.d3(0, 0, 1), jb.d3(0, 0, 1));
}

}  // namespace
