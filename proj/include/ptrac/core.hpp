#pragma once

// Shared basics: point/vector type, error taxonomy, inline-capacity buffer,
// deterministic RNG wrapper, 17-significant-digit formatting.

#include <array>
#include <cassert>
#include <cstddef>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptrac {

using Vec = std::vector<double>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input text (expressions, configs). `offset` indexes into the source
// string when known, -1 otherwise.
struct ParseError : Error {
  ParseError(const std::string& msg, long off = -1) : Error(msg), offset(off) {}
  long offset;
};

// Evaluation singularity: division by zero, log of a non-positive value,
// sqrt of a negative value, derivative of sqrt at zero.
struct EvalError : Error {
  using Error::Error;
};

// Structural misuse detected before any numerics run.
struct ValidationError : Error {
  using Error::Error;
};

// A numerical procedure failed to meet its contract (no convergence,
// singular system, certificate failure).
struct NumericalError : Error {
  using Error::Error;
};

// Buffer with inline capacity N and heap fallback. Jets of chart dimension
// <= 4 never touch the heap; larger dimensions still work.
template <class T, std::size_t N>
class InlineBuf {
 public:
  InlineBuf() = default;
  explicit InlineBuf(std::size_t n) { resize(n); }

  void resize(std::size_t n) {
    size_ = n;
    if (n > N) big_.resize(n);
  }
  std::size_t size() const { return size_; }
  T* data() { return size_ <= N ? small_.data() : big_.data(); }
  const T* data() const { return size_ <= N ? small_.data() : big_.data(); }
  T& operator[](std::size_t i) { return data()[i]; }
  const T& operator[](std::size_t i) const { return data()[i]; }
  void fill(const T& v) {
    T* p = data();
    for (std::size_t i = 0; i < size_; ++i) p[i] = v;
  }

 private:
  std::size_t size_ = 0;
  std::array<T, N> small_{};
  std::vector<T> big_;
};

// All randomness flows through this; mt19937_64 is bit-stable across
// platforms, so a fixed seed gives byte-identical runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) : gen_(seed) {}

  double uniform(double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(gen_);
  }
  int uniform_int(int a, int b) {
    std::uniform_int_distribution<int> d(a, b);
    return d(gen_);
  }
  // Point in [-r, r]^n.
  Vec box_point(int n, double r) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = uniform(-r, r);
    return x;
  }
  std::mt19937_64& raw() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// 17 significant digits: enough to reconstruct the exact double.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double sqr(double x) { return x * x; }

}  // namespace ptrac
