#pragma once

#include <vector>

namespace vpfp {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss–Legendre rule on [-1, 1] with n points (weights sum to 2).
QuadratureRule gauss_legendre(int n);

/// Gauss–Hermite rule for the standard normal density: Σ w_i g(ξ_i) ≈ E[g(ξ)], ξ ~ N(0, 1).
/// Weights sum to 1. Computed with the Golub–Welsch eigenvalue method.
QuadratureRule gauss_hermite_normal(int n);

}  // namespace vpfp
