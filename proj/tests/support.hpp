#pragma once
// Shared helpers for the unit tests: independent integrators and quadrature
// used as oracles, plus a small deterministic sampler.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "fwdegen/model.hpp"

namespace testing {

inline constexpr double kPi = 3.14159265358979323846;

/// Classical RK4 on a scalar ODE with many small steps.
inline double integrate_scalar(const std::function<double(double)>& f, double x0, double T, int steps) {
  const double h = T / steps;
  double x = x0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * h * k1);
    const double k3 = f(x + 0.5 * h * k2);
    const double k4 = f(x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// Composite Gauss-Legendre, 5 points per panel.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  static const double xs[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                               0.9061798459386640};
  static const double ws[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                               0.2369268850561891};
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double c = a + (k + 0.5) * h;
    for (int i = 0; i < 5; ++i) s += ws[i] * f(c + 0.5 * h * xs[i]);
  }
  return 0.5 * h * s;
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  /// Random parameters that pass validation.
  fwdegen::Params params() {
    for (;;) {
      fwdegen::Params p;
      p.lambda1 = uniform(0.2, 3.0);
      p.lambda2 = uniform(0.2, 3.0);
      p.lambda3 = uniform(0.2, 3.0);
      p.sigma0 = uniform(0.3, 2.0);
      p.sigma1 = uniform(-0.95, 0.95) * p.sigma0;
      p.theta = uniform(-3.1, 3.1);
      p.epsilon0 = 0.5;
      p.epsilon = uniform(0.01, 0.49);
      if (fwdegen::validate_params(p).ok()) return p;
    }
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testing
