#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <functional>
#include <vector>

#include "vpfp/equilibrium.hpp"

namespace vpfp {

/// Row k holds mode k, column j holds cell j.
using Coefficients = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Hermite coefficients of f = sqrt(rho_inf) sum_k D_k Psi_k, stored as the deviation
/// D - D_inf (D_inf has D_0 = sqrt(rho_inf) and every other mode zero). Keeping the deviation
/// rather than D itself lets quadratic functionals stay accurate down to the roundoff of the
/// perturbation instead of the roundoff of sqrt(rho_inf).
struct HermiteState {
  Coefficients perturbation;
  /// Modified potential omega_j.
  Eigen::VectorXd omega;
  double time = 0.0;

  int n_modes() const noexcept { return static_cast<int>(perturbation.rows()) - 1; }
  int n_cells() const noexcept { return static_cast<int>(perturbation.cols()); }
};

/// The equilibrium state D_inf with omega = 0.
HermiteState equilibrium_state(const Equilibrium& eq, int n_modes, double time = 0.0);

/// Full coefficients D = D_inf + perturbation.
Coefficients coefficients(const HermiteState& state, const Equilibrium& eq);

/// Builds a state from full coefficients (omega set to zero).
HermiteState state_from_coefficients(const Coefficients& d, const Equilibrium& eq,
                                     double time = 0.0);

struct HermiteBasis {
  double temperature = 1.0;
  int max_mode = 0;
};

/// Psi_k(v) = H_k(v / sqrt(T0)) M(v) for k = 0..k_max, with orthonormal H_k
/// (xi H_k = sqrt(k) H_{k-1} + sqrt(k+1) H_{k+1}) and M the Maxwellian of temperature T0.
/// The recurrence runs on the weighted functions with a tracked exponent, so it neither
/// overflows nor loses the tail; values below the double range underflow to zero.
std::vector<double> eval_hermite_functions(const HermiteBasis& basis, double v, int k_max);

/// Orthonormal H_k(xi) for k = 0..k_max scaled by `weight` (the scaling is applied before the
/// recurrence, so sqrt(w_i) H_k(xi_i) stays bounded for Gauss-Hermite weights).
std::vector<double> eval_hermite_polynomials(double xi, int k_max, double weight = 1.0);

/// Analytic closures C_k(x) for k = 0..closures.size()-1; higher modes are zero.
using ModeClosures = std::vector<std::function<double(double)>>;

/// D_{k,j} = cell average of C_k over K_j divided by sqrt(rho_inf,j).
HermiteState project_modes(const ModeClosures& closures, const Equilibrium& eq, int n_modes,
                           int quadrature_order = 3);

struct ProjectionReport {
  /// sum_{k > 0.9 N_H} ||D_k||^2 / sum_k ||D_k||^2.
  double tail_fraction = 0.0;
  bool under_resolved = false;
};

/// f0(x, v) = h(x, v) M(v); C_k(x) = int h(x, v) H_k(v / sqrt(T0)) M(v) dv by Gauss-Hermite with
/// quad_order nodes in the scaled variable, cell-averaged with Gauss-Legendre of order cell_order.
/// Logs a warning when the tail fraction exceeds 1e-8.
HermiteState project_modulated_maxwellian(const std::function<double(double, double)>& h,
                                          const Equilibrium& eq, int n_modes, int quad_order,
                                          int cell_order = 3, ProjectionReport* report = nullptr);

/// Tail fraction of a coefficient matrix (see ProjectionReport).
double tail_fraction(const Coefficients& d, const SpatialMesh& mesh);

/// f(x_j, v_m) = sqrt(rho_inf,j) sum_k D_{k,j} Psi_k(v_m); rows are cells, columns velocities.
Eigen::MatrixXd reconstruct(const HermiteState& state, const Equilibrium& eq,
                            const std::vector<double>& v_grid);

/// n points uniformly spaced on [lo, hi] (endpoints included).
std::vector<double> linspace(double lo, double hi, int n);

/// Long-format CSV with header "x,v,f", one row per (x_j, v_m).
void write_snapshot_csv(const std::filesystem::path& path, const std::vector<double>& x,
                        const std::vector<double>& v, const Eigen::MatrixXd& f);

/// Flat binary: int64 N_x, int64 N_v, then N_x * N_v doubles in row-major (cell-major) order.
void write_snapshot_binary(const std::filesystem::path& path, const Eigen::MatrixXd& f);
Eigen::MatrixXd read_snapshot_binary(const std::filesystem::path& path);

}  // namespace vpfp
