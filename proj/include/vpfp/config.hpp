#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vpfp/integrator.hpp"

namespace vpfp {

struct MeshSpec {
  double a = -6.0;
  double b = 6.0;
  int n_cells = 128;
};

/// Exactly one of potential, ion_density, ion_density_csv is set.
struct EquilibriumSpec {
  double temperature = 1.0;
  double mean_density = 1.0;
  /// phi_inf(x), evaluated at cell centers.
  std::string potential;
  /// rho_i(x), cell-averaged, then Poisson-Boltzmann.
  std::string ion_density;
  /// One value per cell (first numeric column, optional header), then Poisson-Boltzmann.
  std::string ion_density_csv;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
};

/// Exactly one of modes, maxwellian is set.
struct InitialSpec {
  /// C_0(x), C_1(x), ...: f0 = sum_k C_k Psi_k.
  std::vector<std::string> modes;
  /// h(x, v) with f0 = h M.
  std::string maxwellian;
  /// Gauss-Hermite nodes for the maxwellian path (0: 2 N_H + 2).
  int quad_order = 0;
};

struct EchoSpec {
  bool enabled = false;
  double delta = 0.01;
  double k1 = 0.0;
  double k2 = 0.0;
  double t0 = -30.0;
};

struct OutputSpec {
  /// "csv" or "binary"
  std::string snapshot_format = "csv";
  double v_min = -6.0;
  double v_max = 6.0;
  int n_v = 256;
  /// Write summary.json with the one-step contraction of the l2 distance for every run.
  bool one_step_summary = false;
};

struct ExperimentConfig {
  std::string preset = "custom";
  MeshSpec mesh;
  EquilibriumSpec equilibrium;
  InitialSpec initial;
  /// Named constants available to every expression (besides pi, L, T0).
  std::map<std::string, double> parameters;
  /// eps, tau0 and integrator of `simulation` are replaced by the sweep entries.
  SimulationParams simulation;
  std::vector<double> eps;
  std::vector<double> tau0;
  std::vector<IntegratorKind> integrators;
  /// When > 0, runs with tau0 >= high_tau0_threshold use high_tau0_n_modes modes.
  int high_tau0_n_modes = 0;
  double high_tau0_threshold = 0.0;
  /// "auto" calibrates beta0 on the initial state; a number fixes it; empty disables.
  std::string beta0 = "";
  EchoSpec echo;
  OutputSpec output;
  /// Marks reduced-resolution runs whose output is qualitative only.
  bool qualitative = false;
  std::string note;
};

const std::vector<std::string>& preset_names();

/// Fully populated configuration of a named preset; desk selects reduced resolution where the
/// preset defines one. Throws ConfigError listing the valid names.
ExperimentConfig preset_config(const std::string& name, bool desk = false);

/// Loads TOML (or JSON for .json files; a run manifest is accepted and its "config" is used).
/// A non-custom preset key starts from that preset and applies the remaining keys as overrides;
/// preset = "custom" requires mesh, equilibrium, initial and simulation to be given.
/// Unknown keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_toml(const std::string& text, const std::string& source = "<string>");
ExperimentConfig parse_config_json(const std::string& text);

/// Serializes every field, with preset = "custom", so that the result reloads to the same config.
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);

void validate(const ExperimentConfig& cfg);

}  // namespace vpfp
