#include "vpfp/equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "vpfp/error.hpp"

namespace vpfp {

namespace {

constexpr double kMaxExponent = 700.0;

double weighted_sum(const SpatialMesh& mesh, const std::vector<double>& u) {
  double acc = 0.0;
  for (int j = 0; j < mesh.n_cells(); ++j) acc += mesh.width(j) * u[static_cast<std::size_t>(j)];
  return acc;
}

double max_abs(const std::vector<double>& u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

// Builds rho = c exp(-phi/T0) normalized to the given total mass, shifting the exponent by its
// minimum so that the largest exponential is 1.
Equilibrium build(const SpatialMesh& mesh, std::vector<double> phi, double T0, double total) {
  const auto n = static_cast<std::size_t>(mesh.n_cells());
  const double pmin = *std::min_element(phi.begin(), phi.end());
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = std::exp(-(phi[j] - pmin) / T0);
  const double z = weighted_sum(mesh, g);
  const double scale = total / z;
  Equilibrium eq{mesh, T0, std::move(phi), {}, {}, {}, 0.0};
  eq.rho.resize(n);
  eq.sqrt_rho.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    eq.rho[j] = scale * g[j];
    eq.sqrt_rho[j] = std::sqrt(eq.rho[j]);
  }
  eq.normalization = scale * std::exp(pmin / T0);
  eq.e_field = discrete_field(mesh, eq.sqrt_rho, T0);
  return eq;
}

}  // namespace

double Equilibrium::total_mass() const { return weighted_sum(mesh, rho); }

std::vector<double> discrete_field(const SpatialMesh& mesh, const std::vector<double>& sqrt_rho,
                                   double T0) {
  const int n = mesh.n_cells();
  std::vector<double> e(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double sp = sqrt_rho[static_cast<std::size_t>(mesh.neighbor(j, 1))];
    const double sm = sqrt_rho[static_cast<std::size_t>(mesh.neighbor(j, -1))];
    e[static_cast<std::size_t>(j)] =
        (2.0 * T0 / sqrt_rho[static_cast<std::size_t>(j)]) * (sp - sm) / (2.0 * mesh.width(j));
  }
  return e;
}

Equilibrium from_potential(const SpatialMesh& mesh, std::vector<double> phi, double T0,
                           double mean_density) {
  if (!(T0 > 0.0)) throw ConfigError("from_potential: temperature must be positive");
  if (!(mean_density > 0.0)) throw ConfigError("from_potential: mean density must be positive");
  if (phi.size() != static_cast<std::size_t>(mesh.n_cells())) {
    throw ConfigError("from_potential: potential has " + std::to_string(phi.size()) +
                      " values for " + std::to_string(mesh.n_cells()) + " cells");
  }
  const double m = max_abs(phi) / T0;
  if (!std::isfinite(m) || m > kMaxExponent) {
    throw ConfigError("from_potential: max|phi/T0| = " + std::to_string(m) +
                      " exceeds 700, exp(-phi/T0) would overflow");
  }
  return build(mesh, std::move(phi), T0, mean_density * mesh.length());
}

std::vector<double> laplacian(const SpatialMesh& mesh, const std::vector<double>& u) {
  const int n = mesh.n_cells();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int jp = mesh.neighbor(j, 1), jm = mesh.neighbor(j, -1);
    const double uj = u[static_cast<std::size_t>(j)];
    const double fp = (u[static_cast<std::size_t>(jp)] - uj) / mesh.dual_width(j);
    const double fm = (uj - u[static_cast<std::size_t>(jm)]) / mesh.dual_width(jm);
    out[static_cast<std::size_t>(j)] = (fp - fm) / mesh.width(j);
  }
  return out;
}

Equilibrium solve_poisson_boltzmann(const IonDensity& ion, double T0, double newton_tol,
                                    int max_iter, PoissonBoltzmannReport* report) {
  const SpatialMesh& mesh = ion.mesh;
  const int n = mesh.n_cells();
  if (!(T0 > 0.0)) throw ConfigError("solve_poisson_boltzmann: temperature must be positive");
  if (!(newton_tol > 0.0)) throw ConfigError("solve_poisson_boltzmann: tolerance must be positive");
  if (ion.values.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("solve_poisson_boltzmann: ion density size does not match the mesh");
  }
  if (std::any_of(ion.values.begin(), ion.values.end(), [](double r) { return !(r >= 0.0); })) {
    throw ConfigError("solve_poisson_boltzmann: ion density must be non-negative");
  }
  const double mass = weighted_sum(mesh, ion.values);
  if (!(mass > 0.0)) throw ConfigError("solve_poisson_boltzmann: total ion mass must be positive");

  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);

  // Residual with c from the mass condition; also returns the electron density.
  auto residual = [&](const std::vector<double>& p, std::vector<double>& rho_e) {
    Equilibrium e = build(mesh, p, T0, mass);
    rho_e = e.rho;
    std::vector<double> lap = laplacian(mesh, p);
    std::vector<double> r(static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = -lap[j] - rho_e[j] + ion.values[j];
    return r;
  };
  auto gauge = [&](std::vector<double>& p) {
    const double mean = weighted_sum(mesh, p) / mesh.length();
    for (double& x : p) x -= mean;
  };

  std::vector<double> rho_e;
  std::vector<double> r = residual(phi, rho_e);
  double rnorm = max_abs(r);
  int it = 0;
  for (; it < max_iter && rnorm > newton_tol; ++it) {
    // Jacobian with c frozen: -Lap + diag(rho_e / T0).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      const int jp = mesh.neighbor(j, 1), jm = mesh.neighbor(j, -1);
      const double ap = 1.0 / (mesh.dual_width(j) * mesh.width(j));
      const double am = 1.0 / (mesh.dual_width(jm) * mesh.width(j));
      J(j, jp) -= ap;
      J(j, jm) -= am;
      J(j, j) += ap + am + rho_e[static_cast<std::size_t>(j)] / T0;
    }
    Eigen::VectorXd rv = Eigen::Map<Eigen::VectorXd>(r.data(), n);
    Eigen::VectorXd dphi = J.partialPivLu().solve(-rv);

    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 30; ++h, step *= 0.5) {
      std::vector<double> trial(phi);
      for (int j = 0; j < n; ++j) trial[static_cast<std::size_t>(j)] += step * dphi(j);
      gauge(trial);
      if (max_abs(trial) / T0 > kMaxExponent) continue;
      std::vector<double> rho_t;
      std::vector<double> rt = residual(trial, rho_t);
      const double tn = max_abs(rt);
      if (std::isfinite(tn) && tn < rnorm) {
        phi = std::move(trial);
        r = std::move(rt);
        rho_e = std::move(rho_t);
        rnorm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (report) *report = {it, rnorm};
  if (!(rnorm <= newton_tol)) {
    throw NonConvergence("solve_poisson_boltzmann: no convergence after " + std::to_string(it) +
                             " iterations, residual " + std::to_string(rnorm),
                         rnorm);
  }
  return build(mesh, std::move(phi), T0, mass);
}

}  // namespace vpfp
