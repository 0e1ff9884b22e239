#pragma once

#include <cmath>
#include <memory>
#include <numbers>

#include "vpfp/equilibrium.hpp"
#include "vpfp/hermite.hpp"
#include "vpfp/operators.hpp"
#include "vpfp/stepper_linear.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;

inline std::shared_ptr<const vpfp::TransportOperators> sine_background(int n_cells, double amp = 0.2) {
  const vpfp::SpatialMesh mesh = vpfp::uniform_mesh(-6.0, 6.0, n_cells);
  std::vector<double> phi;
  for (double x : mesh.centers()) phi.push_back(amp * std::sin(kPi * x / 6.0));
  return std::make_shared<const vpfp::TransportOperators>(vpfp::from_potential(mesh, phi, 1.0, 1.0));
}

inline std::shared_ptr<const vpfp::TransportOperators> flat_background(int n_cells, double a = -6.0,
                                                                       double b = 6.0) {
  const vpfp::SpatialMesh mesh = vpfp::uniform_mesh(a, b, n_cells);
  return std::make_shared<const vpfp::TransportOperators>(
      vpfp::from_potential(mesh, std::vector<double>(static_cast<std::size_t>(n_cells), 0.0), 1.0, 1.0));
}

// rho_inf + delta cos(pi x / 6), quasi-neutral with its Poisson field.
inline vpfp::HermiteState perturbed_state(const vpfp::TransportOperators& ops, int n_modes,
                                          double delta = 0.01) {
  const auto& eq = ops.equilibrium();
  vpfp::HermiteState s = vpfp::equilibrium_state(eq, n_modes);
  const auto bump = vpfp::cell_average([&](double x) { return delta * std::cos(kPi * x / 6.0); }, eq.mesh);
  for (int j = 0; j < eq.n_cells(); ++j) {
    s.perturbation(0, j) = bump[static_cast<std::size_t>(j)] / eq.sqrt_rho[static_cast<std::size_t>(j)];
  }
  vpfp::prepare_initial_state(s, ops);
  return s;
}

}  // namespace testing
