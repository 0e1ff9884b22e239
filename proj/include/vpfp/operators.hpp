#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include "vpfp/equilibrium.hpp"

namespace vpfp {

/// Kernel of the transport operator A.
///
/// sqrt(rho_inf) is always in the kernel. On an even number of cells the recurrence
/// A u = 0 has a second periodic solution whenever sum_j (-1)^j / (s_j s_{j+1}) vanishes, which
/// holds exactly for uniform rho_inf and to roundoff for any smooth one; it is then treated as
/// a second kernel direction and constrained with an alternating-sign border.
struct KernelInfo {
  bool parity = false;
  /// |sum (-1)^j / (s_j s_{j+1})| / sum 1 / (s_j s_{j+1}) (0 for odd N_x is not meaningful: 1).
  double alternating_ratio = 1.0;
  /// Columns form a dx-weighted orthonormal basis of the kernel (1 or 2 columns).
  Eigen::MatrixXd basis;

  int dimension() const noexcept { return static_cast<int>(basis.cols()); }
};

KernelInfo detect_kernel(const Equilibrium& eq, double parity_tolerance = 1e-8);

/// Wide-stencil transport operators
///   (A u)_j  =  sqrt(T0) (u_{j+1} - u_{j-1}) / (2 dx_j) - E_j u_j / (2 sqrt(T0))
///   (A* u)_j = -sqrt(T0) (u_{j+1} - u_{j-1}) / (2 dx_j) - E_j u_j / (2 sqrt(T0))
/// They are adjoint in the dx-weighted l2 product on any mesh.
class TransportOperators {
 public:
  explicit TransportOperators(Equilibrium eq);

  const Equilibrium& equilibrium() const noexcept { return eq_; }
  const SpatialMesh& mesh() const noexcept { return eq_.mesh; }
  int n_cells() const noexcept { return eq_.n_cells(); }
  const KernelInfo& kernel() const noexcept { return kernel_; }

  Eigen::VectorXd apply_A(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::VectorXd apply_Astar(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  /// L w = A* (A w / rho_inf).
  Eigen::VectorXd apply_poisson(const Eigen::Ref<const Eigen::VectorXd>& w) const;

  Eigen::SparseMatrix<double> sparse_A() const;
  Eigen::SparseMatrix<double> sparse_Astar() const;
  Eigen::MatrixXd dense_A() const;
  Eigen::MatrixXd dense_Astar() const;
  /// A* diag(1/rho) A as a sparse 5-point matrix.
  Eigen::SparseMatrix<double> sparse_poisson() const;

  /// Stencil coefficients of row j: (j-1, j, j+1).
  double lower(int j) const { return lower_[static_cast<std::size_t>(j)]; }
  double diag(int j) const { return diag_[static_cast<std::size_t>(j)]; }
  double upper(int j) const { return upper_[static_cast<std::size_t>(j)]; }

  /// Removes from u the dx-weighted projection onto the kernel of A.
  void project_off_kernel(Eigen::Ref<Eigen::VectorXd> u) const;

  Eigen::VectorXd widths() const;
  Eigen::VectorXd sqrt_rho() const;

 private:
  Equilibrium eq_;
  KernelInfo kernel_;
  std::vector<double> lower_, diag_, upper_;
};

/// Weight between A* and A in an elliptic constrained solve.
enum class EllipticWeight {
  /// A* rho_inf^{-1} A w = rhs with sum dx w / sqrt(rho_inf) = 0 (modified Poisson).
  inverse_density,
  /// A* A u = rhs with sum dx u sqrt(rho_inf) = 0 (auxiliary problem of the modified entropy).
  unit,
};

struct ConstrainedSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;
};

/// Border vectors for the constrained elliptic problems. Columns of `rows` are the constraint
/// functionals c_l (applied as sum_j c_lj x_j = 0), columns of `cols` are c_l / dx.
struct Border {
  Eigen::MatrixXd rows;
  Eigen::MatrixXd cols;
};
Border make_border(const TransportOperators& ops, EllipticWeight weight);

/// Dense bordered LU of [[A* W A, Q], [C^T, 0]]; factorized once, reused for every solve.
class ConstrainedEllipticSolver {
 public:
  ConstrainedEllipticSolver(const TransportOperators& ops, EllipticWeight weight);

  /// Throws IncompatibleRhs when rhs has a kernel component above 1e-10 relative.
  ConstrainedSolution solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;

  int n_constraints() const noexcept { return static_cast<int>(border_.rows.cols()); }
  const Border& border() const noexcept { return border_; }
  double rcond() const noexcept { return rcond_; }

 private:
  Eigen::MatrixXd kernel_;
  Eigen::VectorXd widths_;
  Border border_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double rcond_ = 0.0;
};

/// Relative size of the kernel component of rhs: max_l |<e_l, rhs>| / ||rhs||.
double kernel_component(const TransportOperators& ops, const Eigen::Ref<const Eigen::VectorXd>& rhs);

}  // namespace vpfp
