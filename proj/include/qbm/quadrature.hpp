#pragma once

#include <vector>

namespace qbm {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// The same rule mapped onto [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace qbm
