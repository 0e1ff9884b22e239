#include "vpfp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>
#include <thread>

#include "vpfp/error.hpp"
#include "vpfp/expression.hpp"
#include "vpfp/log.hpp"

#ifndef VPFP_VERSION
#define VPFP_VERSION "0.0.0"
#endif

namespace vpfp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0e", v);
  return buf;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> read_first_column(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ion density file " + path.string());
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    std::string field = line.substr(start, line.find(',', start) - start);
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str()) {
      if (out.empty() && lineno == 1) continue;  // header
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected a number");
    }
    out.push_back(v);
  }
  return out;
}

// Discrete rho_inf of the cell containing x (periodic).
struct CellLookup {
  const Equilibrium& eq;
  double operator()(double x) const {
    const auto iface = eq.mesh.interfaces();
    const double a = eq.mesh.a(), len = eq.mesh.length();
    double y = std::fmod(x - a, len);
    if (y < 0) y += len;
    y += a;
    auto it = std::upper_bound(iface.begin(), iface.end(), y);
    long j = static_cast<long>(it - iface.begin()) - 1;
    j = std::clamp(j, 0L, static_cast<long>(eq.n_cells()) - 1);
    return eq.rho[static_cast<std::size_t>(j)];
  }
};

json spec_json(const RunSpec& s) {
  return {{"eps", s.eps}, {"tau0", s.tau0}, {"integrator", to_string(s.integrator)},
          {"n_modes", s.n_modes}, {"name", s.name}};
}

ExperimentConfig single_run_config(const ExperimentConfig& cfg, const RunSpec& s) {
  ExperimentConfig c = cfg;
  c.eps = {s.eps};
  c.tau0 = {s.tau0};
  c.integrators = {s.integrator};
  c.simulation.n_modes = s.n_modes;
  c.high_tau0_n_modes = 0;
  c.high_tau0_threshold = 0.0;
  c.output.one_step_summary = false;
  return c;
}

struct SnapshotInfo {
  double requested = 0.0;
  double time = 0.0;
  std::string file;
  double f_min = 0.0, f_max = 0.0, df_min = 0.0, df_max = 0.0;
};

class SnapshotWriter {
 public:
  SnapshotWriter(const ExperimentConfig& cfg, const Equilibrium& eq, fs::path dir)
      : cfg_(cfg), eq_(eq), dir_(std::move(dir)),
        v_(linspace(cfg.output.v_min, cfg.output.v_max, cfg.output.n_v)),
        x_(eq.mesh.centers().begin(), eq.mesh.centers().end()) {}

  void write_equilibrium(int n_modes) {
    fs::create_directories(dir_);
    f_eq_ = reconstruct(equilibrium_state(eq_, n_modes), eq_, v_);
    write(f_eq_, "equilibrium");
  }

  void operator()(const HermiteState& s, double requested, const std::string& tag = "") {
    const Eigen::MatrixXd f = reconstruct(s, eq_, v_);
    char stem[64];
    std::snprintf(stem, sizeof stem, "f%s_t%g", tag.c_str(), requested);
    SnapshotInfo info;
    info.requested = requested;
    info.time = s.time;
    info.file = write(f, stem);
    info.f_min = f.minCoeff();
    info.f_max = f.maxCoeff();
    const Eigen::MatrixXd df = f - f_eq_;
    info.df_min = df.minCoeff();
    info.df_max = df.maxCoeff();
    infos_.push_back(info);
  }

  json manifest() const {
    json snaps = json::array();
    for (const auto& i : infos_) {
      snaps.push_back({{"requested_time", i.requested}, {"time", i.time}, {"file", i.file},
                       {"f_min", i.f_min}, {"f_max", i.f_max}, {"df_min", i.df_min},
                       {"df_max", i.df_max}});
    }
    return {{"format", cfg_.output.snapshot_format},
            {"n_x", x_.size()},
            {"n_v", v_.size()},
            {"v_min", cfg_.output.v_min},
            {"v_max", cfg_.output.v_max},
            {"layout", cfg_.output.snapshot_format == "csv" ? "long: x,v,f" : "int64 n_x, int64 n_v, row-major f[x][v]"},
            {"equilibrium", "snapshots/" + file_name("equilibrium")},
            {"files", snaps}};
  }

 private:
  std::string file_name(const std::string& stem) const {
    return stem + (cfg_.output.snapshot_format == "csv" ? ".csv" : ".bin");
  }
  std::string write(const Eigen::MatrixXd& f, const std::string& stem) {
    const fs::path p = dir_ / file_name(stem);
    if (cfg_.output.snapshot_format == "csv") write_snapshot_csv(p, x_, v_, f);
    else write_snapshot_binary(p, f);
    return "snapshots/" + file_name(stem);
  }

  const ExperimentConfig& cfg_;
  const Equilibrium& eq_;
  fs::path dir_;
  std::vector<double> v_, x_;
  Eigen::MatrixXd f_eq_;
  std::vector<SnapshotInfo> infos_;
};

struct OneStep {
  double l2_before = 0.0;
  double l2_after = 0.0;
};

RunOutcome execute_run(const ExperimentConfig& cfg, const RunSpec& spec,
                       const std::shared_ptr<const TransportOperators>& ops,
                       const ExperimentOptions& opts, OneStep* one_step) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  RunOutcome out;
  out.spec = spec;
  out.dir = opts.out_dir / spec.name;
  fs::create_directories(out.dir);

  SimulationParams params = run_params(cfg, spec);
  const Equilibrium& eq = ops->equilibrium();
  ProjectionReport proj;
  HermiteState initial = build_initial_state(cfg, eq, spec.n_modes, &proj);
  const double t_begin = cfg.echo.enabled ? cfg.echo.t0 : params.t_start;
  initial.time = t_begin;
  prepare_initial_state(initial, *ops);

  json beta = nullptr;
  if (cfg.beta0 == "auto") {
    const Diagnostics d(ops, spec.eps, spec.tau0);
    const Beta0Calibration cal = d.calibrate_beta0(initial);
    params.beta0 = cal.beta0;
    beta = {{"mode", "auto"}, {"beta0", cal.beta0}, {"halvings", cal.halvings},
            {"bound_constant", cal.bound_constant},
            {"window_met_on_initial_state", cal.window_met_on_initial_state}};
  } else if (!cfg.beta0.empty()) {
    params.beta0 = std::stod(cfg.beta0);
    beta = {{"mode", "fixed"}, {"beta0", *params.beta0}};
  }

  SnapshotWriter snaps(cfg, eq, out.dir / "snapshots");
  snaps.write_equilibrium(spec.n_modes);

  long last_pct = -1;
  const std::string label = spec.name;
  auto progress = [&](long n, long total) {
    if (!opts.progress || total <= 0) return;
    const long pct = (10 * n) / total;
    if (pct != last_pct) {
      last_pct = pct;
      log_message(label + ": " + std::to_string(10 * pct) + "%");
    }
  };

  const auto f0 = clock::now();
  double factor_seconds = 0.0;
  long steps = 0;
  if (cfg.echo.enabled) {
    EchoSetup setup{cfg.echo.delta, cfg.echo.k1, cfg.echo.k2, cfg.echo.t0, params.t_end};
    RunSinks s1, s2;
    s1.on_snapshot = [&](const HermiteState& s, double t) { snaps(s, t, "_phase1"); };
    s2.on_snapshot = [&](const HermiteState& s, double t) { snaps(s, t); };
    s1.on_progress = progress;
    s2.on_progress = progress;
    const EchoResult r = run_echo_protocol(ops, params, setup, initial, s1, s2);
    write_diagnostics_csv(out.dir / "diagnostics_phase1.csv", r.phase1.records);
    write_diagnostics_csv(out.dir / "diagnostics.csv", r.phase2.records);
    steps = r.phase1.steps + r.phase2.steps;
    factor_seconds = r.factorization_seconds;
  } else {
    const Integrator integ(ops, params);
    factor_seconds = integ.linear_operator().factorization_seconds();
    if (opts.dump_matrix) integ.linear_operator().dump_matrix_market(out.dir / "matrix.mtx");
    if (one_step) {
      HermiteState s = initial;
      one_step->l2_before = integ.diagnostics().record(s).l2_f;
      integ.step(s);
      s.time += params.dt;
      one_step->l2_after = integ.diagnostics().record(s).l2_f;
    }
    RunSinks sinks;
    sinks.on_snapshot = [&](const HermiteState& s, double t) { snaps(s, t); };
    sinks.on_progress = progress;
    const RunResult r = integ.run(initial, sinks);
    write_diagnostics_csv(out.dir / "diagnostics.csv", r.records);
    steps = r.steps;
  }
  if (cfg.echo.enabled && opts.dump_matrix) {
    LinearStepParams lp;
    lp.eps = params.eps;
    lp.tau0 = params.tau0;
    lp.dt = params.integrator == IntegratorKind::strang ? 0.5 * params.dt : params.dt;
    lp.scheme = params.effective_linear_scheme();
    lp.backend = params.backend;
    lp.pivot_threshold = params.pivot_threshold;
    lp.equilibrate = params.equilibrate;
    LinearStepOperator(ops, params.n_modes, lp).dump_matrix_market(out.dir / "matrix.mtx");
  }
  const double solve_seconds = std::chrono::duration<double>(clock::now() - f0).count();

  out.steps = steps;
  out.factorization_seconds = factor_seconds;
  out.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  json m;
  m["manifest_version"] = 1;
  m["software"] = {{"name", "vpfp"}, {"version", VPFP_VERSION}};
  m["run"] = spec_json(spec);
  m["config"] = json::parse(config_to_json(single_run_config(cfg, spec)));
  m["preset"] = cfg.preset;
  m["qualitative"] = cfg.qualitative;
  if (!cfg.note.empty()) m["note"] = cfg.note;
  m["wall_clock_seconds"] = out.wall_seconds;
  m["time_loop_seconds"] = solve_seconds;
  m["factorization_seconds"] = factor_seconds;
  m["steps"] = steps;
  m["kernel"] = {{"dimension", ops->kernel().dimension()},
                 {"parity", ops->kernel().parity},
                 {"alternating_ratio", ops->kernel().alternating_ratio}};
  m["projection"] = {{"tail_fraction", proj.tail_fraction},
                     {"under_resolved", proj.under_resolved}};
  m["linear_scheme"] = to_string(params.effective_linear_scheme());
  m["nonlinear_scheme"] = to_string(params.effective_nonlinear_scheme());
  m["beta0"] = beta;
  m["csv_columns"] = csv_columns();
  m["diagnostics"] = cfg.echo.enabled ? json::array({"diagnostics_phase1.csv", "diagnostics.csv"})
                                      : json::array({"diagnostics.csv"});
  m["remainder_convention"] = "row n holds the remainder of the step ending at t_n; NaN on the first row";
  m["snapshots"] = snaps.manifest();
  std::ofstream mf(out.dir / "manifest.json");
  if (!mf) throw IoError("cannot write " + (out.dir / "manifest.json").string());
  mf << m.dump(2) << '\n';
  return out;
}

}  // namespace

std::vector<RunSpec> expand_runs(const ExperimentConfig& cfg) {
  std::vector<RunSpec> out;
  for (IntegratorKind k : cfg.integrators) {
    for (double e : cfg.eps) {
      for (double t : cfg.tau0) {
        RunSpec s;
        s.eps = e;
        s.tau0 = t;
        s.integrator = k;
        s.n_modes = cfg.simulation.n_modes;
        if (cfg.high_tau0_n_modes > 0 && t >= cfg.high_tau0_threshold) s.n_modes = cfg.high_tau0_n_modes;
        s.name = to_string(k) + "_eps" + sci(e) + "_tau" + sci(t);
        out.push_back(s);
      }
    }
  }
  return out;
}

std::map<std::string, double> expression_constants(const ExperimentConfig& cfg) {
  std::map<std::string, double> c = cfg.parameters;
  c.emplace("L", 0.5 * (cfg.mesh.b - cfg.mesh.a));
  c.emplace("T0", cfg.equilibrium.temperature);
  return c;
}

Equilibrium build_equilibrium(const ExperimentConfig& cfg) {
  const SpatialMesh mesh = uniform_mesh(cfg.mesh.a, cfg.mesh.b, cfg.mesh.n_cells);
  const auto consts = expression_constants(cfg);
  const auto& e = cfg.equilibrium;
  if (!e.potential.empty()) {
    const Expression phi = Expression::parse(e.potential, {"x"}, consts);
    std::vector<double> values;
    for (double x : mesh.centers()) values.push_back(phi({x}));
    return from_potential(mesh, std::move(values), e.temperature, e.mean_density);
  }
  IonDensity ion{mesh, {}};
  if (!e.ion_density.empty()) {
    const Expression rho = Expression::parse(e.ion_density, {"x"}, consts);
    ion.values = cell_average([&](double x) { return rho({x}); }, mesh);
  } else {
    ion.values = read_first_column(e.ion_density_csv);
    if (static_cast<int>(ion.values.size()) != mesh.n_cells()) {
      throw ConfigError("equilibrium.ion_density_csv: " + std::to_string(ion.values.size()) +
                        " values for " + std::to_string(mesh.n_cells()) + " cells");
    }
  }
  for (double v : ion.values) {
    if (!(v > 0.0)) throw ConfigError("equilibrium: ion density must be positive");
  }
  return solve_poisson_boltzmann(ion, e.temperature, e.newton_tol, e.newton_max_iter);
}

HermiteState build_initial_state(const ExperimentConfig& cfg, const Equilibrium& eq, int n_modes,
                                 ProjectionReport* report) {
  const auto consts = expression_constants(cfg);
  const CellLookup rho_at{eq};
  if (!cfg.initial.modes.empty()) {
    if (static_cast<int>(cfg.initial.modes.size()) > n_modes + 1) {
      throw ConfigError("initial.modes: " + std::to_string(cfg.initial.modes.size()) +
                        " expressions for N_H = " + std::to_string(n_modes));
    }
    ModeClosures closures;
    for (const auto& text : cfg.initial.modes) {
      const Expression ex = Expression::parse(text, {"x", "rho_inf"}, consts);
      closures.push_back([ex, rho_at](double x) { return ex({x, rho_at(x)}); });
    }
    HermiteState s = project_modes(closures, eq, n_modes);
    if (report) report->tail_fraction = tail_fraction(coefficients(s, eq), eq.mesh);
    return s;
  }
  const Expression h = Expression::parse(cfg.initial.maxwellian, {"x", "v", "rho_inf"}, consts);
  const int q = cfg.initial.quad_order > 0 ? cfg.initial.quad_order : 2 * n_modes + 2;
  return project_modulated_maxwellian([&](double x, double v) { return h({x, v, rho_at(x)}); },
                                      eq, n_modes, q, 3, report);
}

SimulationParams run_params(const ExperimentConfig& cfg, const RunSpec& spec) {
  SimulationParams p = cfg.simulation;
  p.eps = spec.eps;
  p.tau0 = spec.tau0;
  p.integrator = spec.integrator;
  p.n_modes = spec.n_modes;
  return p;
}

void write_diagnostics_csv(const fs::path& path, const std::vector<DiagnosticsRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\r\n";
  for (const auto& r : records) {
    const auto vals = csv_values(r);
    for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << fmt17(vals[i]);
    out << "\r\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 3;
  if (dynamic_cast<const SolverError*>(&e)) return 4;
  if (dynamic_cast<const NonFiniteState*>(&e)) return 5;
  return 1;
}

std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& opts) {
  validate(cfg);
  const auto runs = expand_runs(cfg);
  fs::create_directories(opts.out_dir);
  auto ops = std::make_shared<const TransportOperators>(build_equilibrium(cfg));

  std::vector<RunOutcome> outcomes(runs.size());
  std::vector<OneStep> one_steps(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        outcomes[i] = execute_run(cfg, runs[i], ops, opts,
                                  cfg.output.one_step_summary ? &one_steps[i] : nullptr);
        if (opts.progress) log_message(runs[i].name + ": done");
      } catch (const std::exception& e) {
        outcomes[i].spec = runs[i];
        outcomes[i].dir = opts.out_dir / runs[i].name;
        outcomes[i].error = e.what();
        outcomes[i].exit_code = exit_code_for(e);
        log_message(runs[i].name + ": " + e.what());
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(runs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (cfg.output.one_step_summary) {
    json rows = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (!outcomes[i].error.empty()) continue;
      const auto& o = one_steps[i];
      rows.push_back({{"run", runs[i].name}, {"eps", runs[i].eps}, {"tau0", runs[i].tau0},
                      {"integrator", to_string(runs[i].integrator)}, {"dt", cfg.simulation.dt},
                      {"l2_f_initial", o.l2_before}, {"l2_f_one_step", o.l2_after},
                      {"contraction_factor", o.l2_before / o.l2_after}});
    }
    std::ofstream out(opts.out_dir / "summary.json");
    if (!out) throw IoError("cannot write summary.json");
    out << json{{"one_step_contraction", rows}}.dump(2) << '\n';
  }
  return outcomes;
}

}  // namespace vpfp
