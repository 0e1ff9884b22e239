#include "vpfp/integrator.hpp"

#include <cmath>

#include "vpfp/error.hpp"

namespace vpfp {

std::string to_string(IntegratorKind k) {
  switch (k) {
    case IntegratorKind::lie: return "lie";
    case IntegratorKind::strang: return "strang";
    case IntegratorKind::linearized: return "linearized";
  }
  return "?";
}

IntegratorKind parse_integrator(const std::string& s) {
  if (s == "lie") return IntegratorKind::lie;
  if (s == "strang") return IntegratorKind::strang;
  if (s == "linearized") return IntegratorKind::linearized;
  throw ConfigError("unknown integrator '" + s + "' (lie, strang, linearized)");
}

LinearScheme SimulationParams::effective_linear_scheme() const {
  if (linear_scheme) return *linear_scheme;
  return integrator == IntegratorKind::strang ? LinearScheme::sdirk2 : LinearScheme::backward_euler;
}

NonlinearScheme SimulationParams::effective_nonlinear_scheme() const {
  if (nonlinear_scheme) return *nonlinear_scheme;
  return integrator == IntegratorKind::strang ? NonlinearScheme::trapezoidal
                                              : NonlinearScheme::backward_euler;
}

namespace {

void validate(const SimulationParams& p) {
  if (!(p.eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(p.tau0 > 0.0)) throw ConfigError("tau0 must be positive");
  if (!(p.dt > 0.0)) throw ConfigError("dt must be positive");
  if (p.n_modes < 1) throw ConfigError("n_modes must be >= 1");
  if (p.diag_every < 1) throw ConfigError("diag_every must be >= 1");
}

}  // namespace

Integrator::Integrator(std::shared_ptr<const TransportOperators> ops, SimulationParams params)
    : ops_(std::move(ops)), params_(std::move(params)), diag_(ops_, params_.eps, params_.tau0) {
  validate(params_);
  LinearStepParams lp;
  lp.eps = params_.eps;
  lp.tau0 = params_.tau0;
  lp.dt = params_.integrator == IntegratorKind::strang ? 0.5 * params_.dt : params_.dt;
  lp.scheme = params_.effective_linear_scheme();
  lp.backend = params_.backend;
  lp.pivot_threshold = params_.pivot_threshold;
  lp.equilibrate = params_.equilibrate;
  linear_ = std::make_unique<LinearStepOperator>(ops_, params_.n_modes, lp);
  diag_.set_beta0(params_.beta0);
}

void Integrator::step(HermiteState& state) const {
  const NonlinearScheme ns = params_.effective_nonlinear_scheme();
  switch (params_.integrator) {
    case IntegratorKind::linearized:
      linear_->step_inplace(state);
      break;
    case IntegratorKind::lie:
      linear_->step_inplace(state);
      nonlinear_step_inplace(state, *ops_, params_.dt, params_.eps, ns);
      break;
    case IntegratorKind::strang:
      linear_->step_inplace(state);
      nonlinear_step_inplace(state, *ops_, params_.dt, params_.eps, ns);
      linear_->step_inplace(state);
      break;
  }
}

RunResult Integrator::run(HermiteState initial, const RunSinks& sinks) const {
  return run(std::move(initial), params_.t_end, sinks);
}

RunResult Integrator::run(HermiteState initial, double t_end, const RunSinks& sinks) const {
  const double t_start = initial.time;
  const long total = std::max(0L, std::lround((t_end - t_start) / params_.dt));
  std::vector<std::pair<long, double>> snaps;
  for (double ts : params_.snapshot_times) {
    if (ts < t_start - 0.5 * params_.dt || ts > t_end + 0.5 * params_.dt) continue;
    snaps.emplace_back(std::lround((ts - t_start) / params_.dt), ts);
  }
  auto snapshots_at = [&](long n, const HermiteState& s) {
    if (!sinks.on_snapshot) return;
    for (const auto& [sn, ts] : snaps) {
      if (sn == n) sinks.on_snapshot(s, ts);
    }
  };

  RunResult result;
  HermiteState state = std::move(initial);
  auto emit = [&](const DiagnosticsRecord& r) {
    result.records.push_back(r);
    if (sinks.on_record) sinks.on_record(r);
  };
  emit(diag_.record(state));
  snapshots_at(0, state);

  HermiteState previous;
  for (long n = 1; n <= total; ++n) {
    const bool record_now = (n % params_.diag_every == 0) || n == total;
    if (record_now) previous = state;
    step(state);
    // Keep the time grid exact instead of accumulating dt.
    state.time = t_start + static_cast<double>(n) * params_.dt;
    if (!state.perturbation.allFinite() || !state.omega.allFinite()) {
      throw NonFiniteState("non-finite state after step " + std::to_string(n) + " (t = " +
                               std::to_string(state.time) + ")",
                           n);
    }
    if (record_now) {
      previous.time = state.time - params_.dt;
      emit(diag_.record(state, previous));
    }
    snapshots_at(n, state);
    if (sinks.on_progress) sinks.on_progress(n, total);
  }
  result.final_state = std::move(state);
  result.steps = total;
  return result;
}

EchoResult run_echo_protocol(std::shared_ptr<const TransportOperators> ops,
                             const SimulationParams& params, const EchoSetup& setup,
                             const RunSinks& phase1_sinks, const RunSinks& phase2_sinks) {
  const double d = setup.delta, k1 = setup.k1;
  HermiteState s = project_modes({[&](double x) { return 1.0 + d * std::cos(k1 * x); }},
                                 ops->equilibrium(), params.n_modes);
  return run_echo_protocol(std::move(ops), params, setup, std::move(s), phase1_sinks, phase2_sinks);
}

EchoResult run_echo_protocol(std::shared_ptr<const TransportOperators> ops,
                             const SimulationParams& params, const EchoSetup& setup,
                             HermiteState initial, const RunSinks& phase1_sinks,
                             const RunSinks& phase2_sinks) {
  const Equilibrium& eq = ops->equilibrium();
  const double d = setup.delta, k2 = setup.k2;
  initial.time = setup.t0;
  prepare_initial_state(initial, *ops);

  const Integrator integ(ops, params);
  EchoResult out;
  out.factorization_seconds = integ.linear_operator().factorization_seconds();
  out.phase1 = integ.run(std::move(initial), 0.0, phase1_sinks);

  HermiteState s2 = out.phase1.final_state;
  const std::vector<double> bump = cell_average([&](double x) { return d * std::cos(k2 * x); }, eq.mesh);
  for (int j = 0; j < eq.n_cells(); ++j) {
    s2.perturbation(0, j) += bump[static_cast<std::size_t>(j)] / eq.sqrt_rho[static_cast<std::size_t>(j)];
  }
  s2.time = 0.0;
  prepare_initial_state(s2, *ops);
  out.phase2 = integ.run(std::move(s2), setup.t_end, phase2_sinks);
  return out;
}

}  // namespace vpfp
