#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <vector>

#include "vpfp/operators.hpp"

namespace vpfp {

/// Position of every unknown of the coupled implicit step in the global vector:
/// D_0, D_1, omega, D_2 .. D_{N_H}, then the constraint multipliers.
struct GlobalLayout {
  int n_cells = 0;
  int n_modes = 0;
  int n_constraints = 0;

  int d(int k, int j) const noexcept {
    return (k == 0 ? 0 : k == 1 ? n_cells : (k + 1) * n_cells) + j;
  }
  int omega(int j) const noexcept { return 2 * n_cells + j; }
  int lambda(int l) const noexcept { return (n_modes + 2) * n_cells + l; }
  int size() const noexcept { return (n_modes + 2) * n_cells + n_constraints; }
};

/// Direct solver for the block-tridiagonal Hermite chain
///   a_k D_k + sqrt(k) A D_{k-1} - sqrt(k+1) A* D_{k+1} (+ A omega for k = 1) = r_k
///   A* rho^{-1} A omega - D_0 + Q lambda = r_omega,   C^T omega = r_lambda
/// with a_k = diag0 + k * diag_slope. The chain is eliminated from the top mode down to the
/// (D_0, omega, lambda) block with dense LU on every N_x x N_x Schur complement; storage is
/// about (N_H + 4) N_x^2 doubles, work O(N_H N_x^3) once and O(N_H N_x^2) per solve.
class BlockChainLU {
 public:
  BlockChainLU(const TransportOperators& ops, const Border& border, int n_modes, double diag0,
               double diag_slope);

  /// rhs and result use the GlobalLayout ordering.
  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;

  const GlobalLayout& layout() const noexcept { return layout_; }

 private:
  GlobalLayout layout_;
  Eigen::SparseMatrix<double> a_, astar_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> chain_;  // chain_[k] factors S_k, k >= 1
  Eigen::PartialPivLU<Eigen::MatrixXd> head_;                // S_0 on (D_0, omega, lambda)
};

}  // namespace vpfp
