#pragma once

// Classical fixed-step RK4 over flat double-vector states.  Scratch buffers
// live in the stepper so tight transport loops stay allocation-free.

#include "ptrac/core.hpp"

namespace ptrac {

class Rk4 {
 public:
  explicit Rk4(std::size_t dim)
      : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  // One step of y' = f(t, y); f writes the derivative into its third arg.
  template <class F>
  void step(F&& f, double t, double h, Vec& y) {
    const std::size_t m = y.size();
    f(t, y, k1_);
    for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
    f(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    f(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + h * k3_[i];
    f(t + h, tmp_, k4_);
    for (std::size_t i = 0; i < m; ++i)
      y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  Vec k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace ptrac
