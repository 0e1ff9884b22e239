#pragma once

#include <vector>

#include "vpfp/mesh.hpp"

namespace vpfp {

/// Discrete stationary state rho_inf = c_inf exp(-phi_inf / T0) with its well-balanced field.
struct Equilibrium {
  SpatialMesh mesh;
  double temperature = 1.0;
  std::vector<double> phi;
  std::vector<double> rho;
  std::vector<double> sqrt_rho;
  /// E_j = (2 T0 / s_j) (s_{j+1} - s_{j-1}) / (2 dx_j), s = sqrt(rho).
  std::vector<double> e_field;
  double normalization = 1.0;

  int n_cells() const noexcept { return mesh.n_cells(); }
  /// Sum_j dx_j rho_j.
  double total_mass() const;
};

struct IonDensity {
  SpatialMesh mesh;
  std::vector<double> values;
};

/// Well-balanced discrete field for a given sqrt(rho_inf).
std::vector<double> discrete_field(const SpatialMesh& mesh, const std::vector<double>& sqrt_rho,
                                   double T0);

/// rho_j = c exp(-phi_j / T0) with c fixed so that the discrete mean of rho equals mean_density.
/// Throws ConfigError when max |phi / T0| > 700 (exp overflow) or T0, mean_density <= 0.
Equilibrium from_potential(const SpatialMesh& mesh, std::vector<double> phi, double T0,
                           double mean_density);

/// Conservative finite-volume periodic Laplacian (3-point on uniform meshes).
std::vector<double> laplacian(const SpatialMesh& mesh, const std::vector<double>& u);

struct PoissonBoltzmannReport {
  int iterations = 0;
  double residual = 0.0;
};

/// Solves -Lap_h phi = c exp(-phi / T0) - rho_i with c from the mass condition
/// Sum dx c exp(-phi/T0) = Sum dx rho_i and the gauge Sum dx phi = 0.
/// Damped Newton (at most 30 step halvings per iteration); c is refreshed from the mass
/// condition at every iterate. Throws NonConvergence after max_iter iterations.
Equilibrium solve_poisson_boltzmann(const IonDensity& ion, double T0, double newton_tol = 1e-12,
                                    int max_iter = 50, PoissonBoltzmannReport* report = nullptr);

}  // namespace vpfp
