#include "vpfp/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "vpfp/error.hpp"

namespace vpfp {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

namespace {

// Orthonormal recurrence at x up to degree n with running rescaling. Returns H_n / H_{n-1} scaled
// consistently (newton_ratio = H_n / (sqrt(n) H_{n-1})) and log of sum_{k<n} H_k^2.
struct HermiteSums {
  double newton_ratio = 0.0;
  double log_sum = 0.0;
};

HermiteSums hermite_sums(double x, int n) {
  constexpr double kBig = 1e150, kShrink = 1e-150;
  double prev = 0.0, cur = 1.0, sum = 0.0, log_scale = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += cur * cur;
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
    if (std::abs(cur) > kBig || sum > kBig) {
      prev *= kShrink;
      cur *= kShrink;
      sum *= kShrink * kShrink;
      log_scale += 2.0 * std::log(kBig);
    }
  }
  return {cur / (std::sqrt(static_cast<double>(n)) * prev), std::log(sum) + log_scale};
}

}  // namespace

QuadratureRule gauss_hermite_normal(int n) {
  if (n < 1) throw ConfigError("gauss_hermite_normal: n must be >= 1");
  // Nodes: eigenvalues of the Jacobi matrix (off-diagonal sqrt(k)), polished by Newton on H_n.
  // Weights: Christoffel numbers 1 / sum_{k<n} H_k(x_i)^2, which keep full relative accuracy in
  // the tails where the eigenvector formula only has absolute accuracy.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) x -= hermite_sums(x, n).newton_ratio;
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = std::exp(-hermite_sums(x, n).log_sum);
  }
  for (int i = 0; i < n / 2; ++i) {
    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (rule.nodes[b] - rule.nodes[a]);
    const double w = 0.5 * (rule.weights[a] + rule.weights[b]);
    rule.nodes[a] = -x;
    rule.nodes[b] = x;
    rule.weights[a] = rule.weights[b] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace vpfp
