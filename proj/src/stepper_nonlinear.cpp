#include "vpfp/stepper_nonlinear.hpp"

#include <cmath>

namespace vpfp {

std::string to_string(NonlinearScheme s) {
  return s == NonlinearScheme::backward_euler ? "backward_euler" : "trapezoidal";
}

Eigen::VectorXd field_factor(const TransportOperators& ops, const Eigen::Ref<const Eigen::VectorXd>& omega) {
  return ops.apply_A(omega).cwiseQuotient(ops.sqrt_rho());
}

void nonlinear_substitution(Coefficients& p, const Eigen::Ref<const Eigen::VectorXd>& g,
                            double dt, double eps, NonlinearScheme scheme) {
  const int nh = static_cast<int>(p.rows()) - 1;
  if (scheme == NonlinearScheme::backward_euler) {
    const Eigen::RowVectorXd c = (dt / eps) * g.transpose();
    for (int k = 1; k <= nh; ++k) {
      p.row(k) -= std::sqrt(static_cast<double>(k)) * c.cwiseProduct(p.row(k - 1));
    }
  } else {
    const Eigen::RowVectorXd c = (0.5 * dt / eps) * g.transpose();
    // old_prev holds D_{k-1} before its own update.
    Eigen::RowVectorXd old_prev = p.row(0);
    for (int k = 1; k <= nh; ++k) {
      Eigen::RowVectorXd old_k = p.row(k);
      p.row(k) -= std::sqrt(static_cast<double>(k)) * c.cwiseProduct(p.row(k - 1) + old_prev);
      old_prev = std::move(old_k);
    }
  }
}

void nonlinear_step_inplace(HermiteState& state, const TransportOperators& ops, double dt,
                            double eps, NonlinearScheme scheme) {
  const Eigen::VectorXd g = field_factor(ops, state.omega);
  if (g.isZero(0.0)) return;
  nonlinear_substitution(state.perturbation, g, dt, eps, scheme);
}

HermiteState nonlinear_step(const HermiteState& state, const TransportOperators& ops, double dt,
                            double eps, NonlinearScheme scheme) {
  HermiteState out = state;
  nonlinear_step_inplace(out, ops, dt, eps, scheme);
  return out;
}

}  // namespace vpfp
