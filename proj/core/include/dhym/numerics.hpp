#pragma once

#include <span>
#include <vector>

namespace dhym {

/// Gauss-Legendre rule mapped to [a, b]; exact for polynomials of degree 2m-1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int m, double a = 0.0, double b = 1.0);

/// Pairwise (cascade) summation with a fixed split order, so results are
/// reproducible independent of how the caller produced the values.
double pairwise_sum(std::span<const double> values);

}  // namespace dhym
