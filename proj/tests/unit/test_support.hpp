#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dhym/torus.hpp"

namespace dhym::testing {

inline constexpr double kPi = std::numbers::pi;

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

/// Central difference of f along coordinate k with step h.
template <class F>
double central_diff(F&& f, std::vector<double> x, std::size_t k, double h) {
  x[k] += h;
  const double up = f(x);
  x[k] -= 2.0 * h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

inline Potential random_bump(const TorusGrid& g, std::mt19937_64& rng, double max_amp) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PeriodicBump b;
  b.amplitude = max_amp * (2.0 * u(rng) - 1.0);
  for (int a = 0; a < g.axes(); ++a) b.center[static_cast<std::size_t>(a)] = g.L() * u(rng);
  b.width = 0.7 + 0.5 * u(rng);
  return bump_potential(g, std::span(&b, 1));
}

}  // namespace dhym::testing
