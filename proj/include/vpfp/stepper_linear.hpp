#pragma once

#include <Eigen/SparseCore>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "vpfp/chain_lu.hpp"
#include "vpfp/hermite.hpp"
#include "vpfp/operators.hpp"

namespace vpfp {

enum class LinearScheme {
  backward_euler,
  /// Implicit midpoint: backward Euler over dt/2, then D+ = 2Y - D.
  midpoint,
  /// Two-stage L-stable SDIRK, gamma = 1 - 1/sqrt(2); both stages share one factorization.
  sdirk2,
};

enum class LinearBackend { block_chain, sparse_lu };

std::string to_string(LinearScheme s);
std::string to_string(LinearBackend b);
LinearScheme parse_linear_scheme(const std::string& s);
LinearBackend parse_linear_backend(const std::string& s);

struct LinearStepParams {
  double eps = 1.0;
  double tau0 = 1.0;
  /// Substep length in the time variable of eps d_t f + ... (not rescaled by eps).
  double dt = 0.1;
  LinearScheme scheme = LinearScheme::backward_euler;
  LinearBackend backend = LinearBackend::block_chain;
  /// Diagonal pivot threshold for the sparse backend (1 = partial pivoting).
  double pivot_threshold = 1.0;
  /// Row equilibration for the sparse backend; default on for eps >= 1e-3, off below.
  std::optional<bool> equilibrate;
};

/// Factorized implicit step of the linearized system
///   eps (D_k - D_k^n) / h + sqrt(k) A D_{k-1} - sqrt(k+1) A* D_{k+1} + [k = 1] A omega = -(k / tau0) D_k
///   A* rho^{-1} A omega = D_0 - sqrt(rho_inf),   C^T omega = 0
/// where h is the backward-Euler substep of the chosen scheme. Assembled and factorized once.
class LinearStepOperator {
 public:
  LinearStepOperator(std::shared_ptr<const TransportOperators> ops, int n_modes,
                     LinearStepParams params);
  ~LinearStepOperator();
  LinearStepOperator(LinearStepOperator&&) noexcept;
  LinearStepOperator& operator=(LinearStepOperator&&) noexcept;

  const LinearStepParams& params() const noexcept { return params_; }
  const TransportOperators& ops() const noexcept { return *ops_; }
  int n_modes() const noexcept { return layout_.n_modes; }
  const GlobalLayout& layout() const noexcept { return layout_; }
  /// Backward-Euler substep used inside the factorized matrix.
  double internal_dt() const noexcept { return h_; }
  double factorization_seconds() const noexcept { return factor_seconds_; }

  /// Advances state by params().dt.
  HermiteState step(const HermiteState& state) const;
  void step_inplace(HermiteState& state) const;

  /// Solves the factorized backward-Euler matrix; rhs and result in GlobalLayout ordering.
  Eigen::VectorXd solve_global(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;

  /// The assembled matrix (GlobalLayout ordering, rows unscaled).
  Eigen::SparseMatrix<double> global_matrix() const;
  void dump_matrix_market(const std::filesystem::path& path) const;

 private:
  // One backward-Euler solve with internal step h from the deviation `start`.
  void be_solve(const Coefficients& start, Coefficients& out, Eigen::VectorXd& omega) const;

  std::shared_ptr<const TransportOperators> ops_;
  LinearStepParams params_;
  GlobalLayout layout_;
  Border border_;
  double h_ = 0.0;
  double factor_seconds_ = 0.0;
  struct SparseBackend;
  std::unique_ptr<BlockChainLU> chain_;
  std::unique_ptr<SparseBackend> sparse_;
};

/// Sparse matrix of the backward-Euler step with diagonal eps / h + k / tau0.
Eigen::SparseMatrix<double> assemble_step_matrix(const TransportOperators& ops, const Border& border,
                                                 int n_modes, double eps, double tau0, double h);

void write_matrix_market(const std::filesystem::path& path, const Eigen::SparseMatrix<double>& m);

/// Makes the state quasi-neutral (removes the kernel component of D_0 - sqrt(rho_inf)) and
/// solves the constrained Poisson problem for omega.
void prepare_initial_state(HermiteState& state, const TransportOperators& ops);

}  // namespace vpfp
