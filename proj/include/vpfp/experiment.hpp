#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "vpfp/config.hpp"
#include "vpfp/hermite.hpp"

namespace vpfp {

/// One (eps, tau0, integrator) entry of a sweep.
struct RunSpec {
  double eps = 1.0;
  double tau0 = 1.0;
  IntegratorKind integrator = IntegratorKind::strang;
  int n_modes = 1;
  /// Directory name, e.g. "strang_eps1e-02_tau1e+05".
  std::string name;
};

std::vector<RunSpec> expand_runs(const ExperimentConfig& cfg);

/// Constants visible to every expression: pi, L = (b - a)/2, T0 and cfg.parameters.
std::map<std::string, double> expression_constants(const ExperimentConfig& cfg);

Equilibrium build_equilibrium(const ExperimentConfig& cfg);

/// Raw projection of the configured initial data (not yet quasi-neutral). Expressions may read x,
/// rho_inf (the discrete equilibrium density of the cell containing x) and, for the maxwellian
/// form, v.
HermiteState build_initial_state(const ExperimentConfig& cfg, const Equilibrium& eq, int n_modes,
                                 ProjectionReport* report = nullptr);

/// Parameters of one run: cfg.simulation with the sweep entry applied.
SimulationParams run_params(const ExperimentConfig& cfg, const RunSpec& spec);

struct ExperimentOptions {
  std::filesystem::path out_dir = "out";
  int threads = 1;
  bool dump_matrix = false;
  bool progress = true;
};

struct RunOutcome {
  RunSpec spec;
  std::filesystem::path dir;
  long steps = 0;
  double wall_seconds = 0.0;
  double factorization_seconds = 0.0;
  /// Empty on success.
  std::string error;
  int exit_code = 0;
};

/// Runs every entry of the sweep, writing diagnostics.csv, manifest.json and snapshots/ under
/// out_dir/<run name>. Failed runs are reported in the outcome; the others still run.
std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& opts);

/// Process exit code for an exception: 2 config, 3 I/O, 4 solver, 5 non-finite state, 1 other.
int exit_code_for(const std::exception& e);

/// Writes rows of csv_values with 17 significant digits.
void write_diagnostics_csv(const std::filesystem::path& path,
                           const std::vector<DiagnosticsRecord>& records);

}  // namespace vpfp
