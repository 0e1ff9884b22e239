#pragma once

#include <Eigen/Core>
#include <string>

#include "vpfp/hermite.hpp"
#include "vpfp/operators.hpp"

namespace vpfp {

enum class NonlinearScheme {
  /// D_k+ = D_k - (dt/eps) sqrt(k) G (D_{k-1}+ - D_inf,k-1)
  backward_euler,
  /// D_k+ = D_k - (dt/(2 eps)) sqrt(k) G (D_{k-1}+ + D_{k-1} - 2 D_inf,k-1)
  trapezoidal,
};

std::string to_string(NonlinearScheme s);

/// G_j = (A omega)_j / sqrt(rho_inf,j).
Eigen::VectorXd field_factor(const TransportOperators& ops, const Eigen::Ref<const Eigen::VectorXd>& omega);

/// Forward substitution on the deviation rows (row k = mode k, column j = cell j) with the
/// per-cell factor g.
void nonlinear_substitution(Coefficients& deviation, const Eigen::Ref<const Eigen::VectorXd>& g,
                            double dt, double eps, NonlinearScheme scheme);

/// Quadratic-correction substep with the field frozen at state.omega. D_0 and omega are left
/// untouched; modes 1..N_H are updated in increasing order (one unknown per equation).
void nonlinear_step_inplace(HermiteState& state, const TransportOperators& ops, double dt,
                            double eps, NonlinearScheme scheme);

HermiteState nonlinear_step(const HermiteState& state, const TransportOperators& ops, double dt,
                            double eps, NonlinearScheme scheme);

}  // namespace vpfp
