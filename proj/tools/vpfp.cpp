#include <CLI11.hpp>
#include <algorithm>
#include <iostream>

#include "vpfp/error.hpp"
#include "vpfp/experiment.hpp"

namespace {

const char* kCsvSchema = R"(Output layout (one directory per sweep entry under --out):
  diagnostics.csv   RFC-4180, header row, 17 significant digits, one row per diagnostic step:
    t             time
    t_over_eps    t / eps
    energy        discrete free energy (1/2) sum_k ||D_k - D_inf,k||^2 + (1/2) ||A omega / sqrt(rho_inf)||^2
    dissipation   (1/(eps tau0)) sum_k k ||D_k||^2
    remainder     (1/2) ||dD/dt||^2 + (1/2) ||A d omega/dt / sqrt(rho_inf)||^2 over the step ending
                  on this row; nan on the first row
    l2_f          ||f - f_inf|| in L2(dx dv / f_inf)
    l2_local      distance to the local equilibrium (modes k >= 1)
    l2_rho        ||rho - rho_inf|| weighted by 1/rho_inf
    e_pot         sum_j dx_j E_j^2
    mode1..mode4  |E_m|^2 of the first four Fourier modes of E
    mass          sum_j dx_j rho_j
    h_functional  modified entropy (nan unless beta0 is set)
  diagnostics_phase1.csv   echo runs only: the phase before the second pulse
  manifest.json     parameters, reloadable config, timings, software version, snapshot metadata
  snapshots/        f_t<time>.csv (x,v,f long format) or .bin, and equilibrium.csv
  summary.json      ap_sweep: one-step contraction factors l2_f(0) / l2_f(dt)

Exit codes: 0 ok, 1 other error, 2 configuration, 3 I/O, 4 solver failure, 5 non-finite state.)";

struct Overrides {
  double t_end = 0.0;
  int n_modes = 0;
  double dt = 0.0;
  int diag_every = 0;
  std::string backend;
};

void apply(vpfp::ExperimentConfig& cfg, const Overrides& o) {
  if (o.t_end > 0.0) {
    cfg.simulation.t_end = o.t_end;
    std::erase_if(cfg.simulation.snapshot_times, [&](double t) { return t > o.t_end; });
  }
  if (o.n_modes > 0) {
    cfg.simulation.n_modes = o.n_modes;
    cfg.high_tau0_n_modes = 0;
  }
  if (o.dt > 0.0) cfg.simulation.dt = o.dt;
  if (o.diag_every > 0) cfg.simulation.diag_every = o.diag_every;
  if (!o.backend.empty()) cfg.simulation.backend = vpfp::parse_linear_backend(o.backend);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermite / finite-volume solver for the 1D Vlasov-Poisson-Fokker-Planck system"};
  app.footer(kCsvSchema);
  app.require_subcommand(1);

  vpfp::ExperimentOptions opts;
  std::string out_dir = "out";
  bool desk = false, quiet = false;
  Overrides ov;
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--threads", opts.threads, "Sweep members run in parallel")
        ->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--dump-matrix", opts.dump_matrix, "Write the step matrix (Matrix Market) per run");
    sub->add_flag("--quiet", quiet, "No progress messages");
    sub->add_option("--t-end", ov.t_end, "Override the final time");
    sub->add_option("--n-modes", ov.n_modes, "Override N_H");
    sub->add_option("--dt", ov.dt, "Override the time step");
    sub->add_option("--diag-every", ov.diag_every, "Override the diagnostics cadence");
    sub->add_option("--backend", ov.backend, "block_chain or sparse_lu");
  };
  for (const auto& name : vpfp::preset_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " preset");
    add_common(sub);
    if (name == "plasma_echo") sub->add_flag("--desk", desk, "Reduced N_H (qualitative)");
  }
  auto* custom = app.add_subcommand("custom", "Run a TOML config (or a manifest.json)");
  custom->add_option("--config", config_path, "Config file")->required();
  add_common(custom);

  if (argc > 1 && argv[1][0] != '-') {
    const std::string first = argv[1];
    const auto& names = vpfp::preset_names();
    if (first != "custom" && std::find(names.begin(), names.end(), first) == names.end()) {
      std::cerr << "vpfp: error: unknown preset '" << first << "' (valid: ";
      for (const auto& n : names) std::cerr << n << ", ";
      std::cerr << "custom)\n";
      return 2;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    vpfp::ExperimentConfig cfg = sub->get_name() == "custom"
                                     ? vpfp::load_config(config_path)
                                     : vpfp::preset_config(sub->get_name(), desk);
    apply(cfg, ov);
    vpfp::validate(cfg);
    opts.out_dir = out_dir;
    opts.progress = !quiet;
    const auto outcomes = vpfp::run_experiment(cfg, opts);
    int rc = 0;
    for (const auto& o : outcomes) {
      if (o.exit_code != 0) {
        std::cerr << "vpfp: run " << o.spec.name << " failed: " << o.error << '\n';
        if (rc == 0) rc = o.exit_code;
      }
    }
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "vpfp: error: " << e.what() << '\n';
    return vpfp::exit_code_for(e);
  }
}
