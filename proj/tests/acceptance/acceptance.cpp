// Acceptance suite: one PASS/FAIL line per criterion.
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vpfp/experiment.hpp"
#include "vpfp/integrator.hpp"
#include "vpfp/log.hpp"

using namespace vpfp;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Section 4.1 data: phi = 0.2 sin(pi x / 6), f0 = (rho_inf + delta cos(pi x / 6)) M.
ExperimentConfig smooth_setup(int n_cells) {
  ExperimentConfig c = preset_config("ap_sweep");
  c.mesh.n_cells = n_cells;
  return c;
}

struct Problem {
  std::shared_ptr<const TransportOperators> ops;
  HermiteState initial;
};

Problem make_problem(const ExperimentConfig& c, int n_modes) {
  Problem p;
  p.ops = std::make_shared<const TransportOperators>(build_equilibrium(c));
  p.initial = build_initial_state(c, p.ops->equilibrium(), n_modes);
  prepare_initial_state(p.initial, *p.ops);
  return p;
}

SimulationParams params(double eps, double tau0, double dt, double t_end, int n_modes,
                        IntegratorKind kind) {
  SimulationParams p;
  p.eps = eps;
  p.tau0 = tau0;
  p.dt = dt;
  p.t_end = t_end;
  p.n_modes = n_modes;
  p.integrator = kind;
  return p;
}

std::vector<double> column(const std::vector<DiagnosticsRecord>& r, double DiagnosticsRecord::*f) {
  std::vector<double> out;
  for (const auto& x : r) out.push_back(x.*f);
  return out;
}

double wnorm(const TransportOperators& ops, const Coefficients& d) {
  const Eigen::VectorXd dx = ops.widths();
  double s = 0.0;
  for (int k = 0; k < d.rows(); ++k) s += (dx.transpose().array() * d.row(k).array().square()).sum();
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------------------------

Verdict criterion1() {
  const int nx = 64, nh = 32, steps = 500;
  const double dt = 0.1;
  const Problem pb = make_problem(smooth_setup(nx), nh);
  double worst = 0.0;
  for (double tau0 : {1.0, 1e2, 1e5}) {
    const Integrator integ(pb.ops, params(1.0, tau0, dt, steps * dt, nh, IntegratorKind::linearized));
    const Diagnostics& d = integ.diagnostics();
    HermiteState s = pb.initial;
    for (int n = 0; n < steps; ++n) {
      HermiteState prev = s;
      integ.step(s);
      s.time = prev.time + dt;
      const double e0 = d.energy(prev), e1 = d.energy(s);
      const double res = (e1 - e0) / dt + dt * d.remainder(prev, s, dt) + d.dissipation(s);
      worst = std::max(worst, dt * std::abs(res) / e0);
    }
  }
  return {worst <= 1e-10, fmt("max |identity residual| * dt / E^n = %.2e over 3 x 500 steps (tol 1e-10)", worst)};
}

Verdict criterion2() {
  const int nx = 64, nh = 32;
  ExperimentConfig c = smooth_setup(nx);
  c.initial.modes = {"rho_inf"};
  auto ops = std::make_shared<const TransportOperators>(build_equilibrium(c));
  const auto& eq = ops->equilibrium();
  HermiteState eq_state = build_initial_state(c, eq, nh);
  prepare_initial_state(eq_state, *ops);
  const double ref = wnorm(*ops, coefficients(equilibrium_state(eq, nh), eq));
  const double start = wnorm(*ops, eq_state.perturbation) / ref;
  double worst = 0.0;
  int runs = 0;
  for (double eps : {1.0, 1e-2, 1e-6}) {
    for (double tau0 : {1.0, 1e5}) {
      for (auto kind : {IntegratorKind::linearized, IntegratorKind::lie, IntegratorKind::strang}) {
        const Integrator integ(ops, params(eps, tau0, 0.1, 20.0, nh, kind));
        HermiteState s = eq_state;
        for (int n = 0; n < 200; ++n) {
          integ.step(s);
          worst = std::max(worst, wnorm(*ops, s.perturbation) / ref);
        }
        ++runs;
      }
    }
  }
  return {worst <= 1e-12, fmt("max ||D^n - D_inf|| / ||D_inf|| = %.2e over %d runs x 200 steps from projected "
                              "rho_inf data (%.2e at t = 0) (tol 1e-12)", worst, runs, start)};
}

Verdict criterion3() {
  ExperimentConfig c = preset_config("two_stream");
  const int nh = 100;
  const Problem pb = make_problem(c, nh);
  double worst = 0.0;
  std::string per;
  for (double tau0 : {1.0, 1e4}) {
    const Integrator integ(pb.ops, params(1.0, tau0, 0.1, 100.0, nh, IntegratorKind::strang));
    HermiteState s = pb.initial;
    const double m0 = integ.diagnostics().record(s).mass;
    double w = 0.0;
    for (int n = 0; n < 1000; ++n) {
      integ.step(s);
      w = std::max(w, std::abs(integ.diagnostics().record(s).mass - m0) / m0);
    }
    worst = std::max(worst, w);
    per += fmt(" tau0=%g: %.2e", tau0, w);
  }
  return {worst <= 1e-11, "max relative mass drift over 1000 Strang steps, N_H = 100:" + per + " (tol 1e-11)"};
}

Verdict criterion4() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  double adj = 0.0, kern = 0.0;
  for (const auto& name : preset_names()) {
    const ExperimentConfig c = preset_config(name);
    const TransportOperators ops(build_equilibrium(c));
    const Eigen::VectorXd dx = ops.widths();
    const int n = ops.n_cells();
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXd u(n), v(n);
      for (int j = 0; j < n; ++j) u(j) = g(rng), v(j) = g(rng);
      const double lhs = (dx.array() * ops.apply_A(u).array() * v.array()).sum();
      const double rhs = (dx.array() * u.array() * ops.apply_Astar(v).array()).sum();
      const double scale = std::sqrt((dx.array() * u.array().square()).sum() * (dx.array() * v.array().square()).sum());
      adj = std::max(adj, std::abs(lhs - rhs) / scale);
    }
    kern = std::max(kern, std::sqrt((dx.array() * ops.apply_A(ops.sqrt_rho()).array().square()).sum()));
  }
  return {adj <= 1e-13 && kern <= 1e-13,
          fmt("max |<Au,v> - <u,A*v>| / (|u||v|) = %.2e, max ||A sqrt(rho_inf)|| = %.2e over all presets (tol 1e-13)", adj, kern)};
}

double energy_rate(const Problem& pb, double eps, double dt, int nh, double t_end) {
  SimulationParams p = params(eps, 1.0, dt, t_end, nh, IntegratorKind::linearized);
  const Integrator integ(pb.ops, p);
  const RunResult r = integ.run(pb.initial);
  const auto t = column(r.records, &DiagnosticsRecord::t);
  const auto e = column(r.records, &DiagnosticsRecord::energy);
  // Fit where the energy has left the initial transient and is still far above underflow.
  double lo = t.back(), hi = t.front();
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] <= 1e-2 * e[0]) lo = std::min(lo, t[i]);
    if (e[i] >= 1e-30 * e[0]) hi = std::max(hi, t[i]);
  }
  return fit_decay_rate(t, e, lo, hi);
}

Verdict criterion5() {
  const int nh = 32;
  const Problem p64 = make_problem(smooth_setup(64), nh);
  std::vector<double> rates;
  for (double eps : {1.0, 0.1, 0.01}) rates.push_back(energy_rate(p64, eps, 0.1, nh, 40.0));
  double scaling_err = 1.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double eps = std::pow(10.0, -static_cast<double>(i));
    const double ratio = (rates[i] * eps) / rates[0];
    scaling_err = std::max(scaling_err, std::max(ratio, 1.0 / ratio));
  }
  std::vector<double> robust;
  for (int nx : {32, 64, 128}) robust.push_back(energy_rate(make_problem(smooth_setup(nx), nh), 1.0, 0.1, nh, 40.0));
  for (double dt : {0.05, 0.2}) robust.push_back(energy_rate(p64, 1.0, dt, nh, 40.0));
  const auto [mn, mx] = std::minmax_element(robust.begin(), robust.end());
  const double spread = (*mx - *mn) / *mn;
  // Informational: the same eps sweep with dt / eps fixed.
  std::vector<double> scaled;
  for (double eps : {1.0, 0.1, 0.01}) scaled.push_back(energy_rate(p64, eps, 0.1 * eps, nh, 40.0 * eps));
  const bool pass = scaling_err <= 1.5 && spread < 0.25;
  return {pass, fmt("E rates eps=1,0.1,0.01 at dt=0.1: %.4g %.4g %.4g (eps*rate vs eps=1 off by x%.2f, tol 1.5); "
                    "spread over N_x {32,64,128} and dt {0.05,0.1,0.2}: %.1f%% (tol 25%%); "
                    "info, dt = 0.1 eps: %.4g %.4g %.4g",
                    rates[0], rates[1], rates[2], scaling_err, 100.0 * spread, scaled[0], scaled[1], scaled[2])};
}

Verdict criterion6() {
  ExperimentConfig c = preset_config("ap_sweep");
  const Problem pb = make_problem(c, 80);
  const Integrator integ(pb.ops, params(1e-6, 1e5, 0.1, 0.1, 80, IntegratorKind::strang));
  HermiteState s = pb.initial;
  const double before = integ.diagnostics().record(s).l2_f;
  integ.step(s);
  const double after = integ.diagnostics().record(s).l2_f;
  const double factor = before / after;
  return {factor >= 1e3, fmt("one-step L2 contraction at eps = 1e-6: %.3g (tol >= 1e3)", factor)};
}

struct EchoSeries {
  std::vector<double> t, e_pot;
};

EchoSeries echo_run(int nh, IntegratorKind kind, double t_end) {
  ExperimentConfig c = preset_config("plasma_echo", true);
  c.simulation.n_modes = nh;
  auto ops = std::make_shared<const TransportOperators>(build_equilibrium(c));
  SimulationParams p = run_params(c, RunSpec{1.0, 1e6, kind, nh, ""});
  HermiteState init = build_initial_state(c, ops->equilibrium(), nh);
  const EchoSetup setup{c.echo.delta, c.echo.k1, c.echo.k2, c.echo.t0, t_end};
  const EchoResult r = run_echo_protocol(ops, p, setup, init);
  return {column(r.phase2.records, &DiagnosticsRecord::t), column(r.phase2.records, &DiagnosticsRecord::e_pot)};
}

Verdict criterion7() {
  const EchoSeries s = echo_run(400, IntegratorKind::linearized, 15.0);
  std::vector<double> amp;
  for (double e : s.e_pot) amp.push_back(std::sqrt(e));
  const double rate = fit_envelope_decay_rate(s.t, amp, 5.0, 15.0);
  const double rate_ep = fit_envelope_decay_rate(s.t, s.e_pot, 5.0, 15.0);
  const bool pass = std::abs(rate - 0.355) <= 0.15 * 0.355;
  return {pass, fmt("linearized echo, N_H = 400: envelope decay of sqrt(E_p) on [5,15] = %.4f (target 0.355 +- 15%%); "
                    "info: E_p itself decays at %.4f",
                    rate, rate_ep)};
}

bool is_local_max(const EchoSeries& s, std::size_t i) {
  return s.e_pot[i] >= s.e_pot[i - 1] && s.e_pot[i] >= s.e_pot[i + 1];
}

// Echo: the largest local maximum in [lo, hi] stands 10x above the quiet-phase envelope (the
// smallest local maximum on [10, lo]). E_p passes near zero every half period, so raw minima
// are not a baseline.
bool has_echo_peak(const EchoSeries& s, double lo, double hi, double* t_peak) {
  double quiet = std::numeric_limits<double>::infinity();
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < s.t.size(); ++i) {
    if (!is_local_max(s, i)) continue;
    if (s.t[i] >= 10.0 && s.t[i] < lo) quiet = std::min(quiet, s.e_pot[i]);
    if (s.t[i] >= lo && s.t[i] <= hi && s.e_pot[i] > best) {
      best = s.e_pot[i];
      *t_peak = s.t[i];
    }
  }
  return std::isfinite(quiet) && best > 10.0 * quiet;
}

// Upper envelope through local maxima; monotone if every maximum is below the previous one.
bool envelope_monotone(const EchoSeries& s, double lo, double hi) {
  double last = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < s.t.size(); ++i) {
    if (s.t[i] < lo || s.t[i] > hi) continue;
    if (is_local_max(s, i)) {
      if (s.e_pot[i] > last * (1.0 + 1e-6)) return false;
      last = s.e_pot[i];
    }
  }
  return true;
}

Verdict criterion8(bool full) {
  const int nh = full ? 8000 : 800;
  const double t_end = full ? 120.0 : 45.0;
  const EchoSeries nl = echo_run(nh, IntegratorKind::strang, t_end);
  const EchoSeries lin = echo_run(nh, IntegratorKind::linearized, t_end);
  double t_peak = 0.0;
  const bool peak = has_echo_peak(nl, 26.0, 34.0, &t_peak);
  const bool mono = envelope_monotone(lin, 5.0, 40.0);
  double dummy = 0.0;
  const bool lin_peak = has_echo_peak(lin, 26.0, 34.0, &dummy);
  return {peak && mono && !lin_peak,
          fmt("N_H = %d%s: nonlinear E_p echo maximum %s (t = %.1f, window [26,34]); linearized: envelope %s, "
              "echo maximum %s",
              nh, full ? "" : " (desk mode, qualitative)", peak ? "found" : "NOT found", t_peak,
              mono ? "monotone" : "NOT monotone", lin_peak ? "found" : "absent")};
}

Verdict criterion9() {
  ExperimentConfig c = preset_config("nonuniform_perturbation");
  const int nh = c.high_tau0_n_modes;
  const Problem pb = make_problem(c, nh);
  double rates[2];
  int i = 0;
  for (auto kind : {IntegratorKind::strang, IntegratorKind::linearized}) {
    SimulationParams p = run_params(c, RunSpec{1.0, 1e4, kind, nh, ""});
    p.t_end = 70.0;
    p.snapshot_times.clear();
    const RunResult r = Integrator(pb.ops, p).run(pb.initial);
    rates[i++] = fit_envelope_decay_rate(column(r.records, &DiagnosticsRecord::t),
                                         column(r.records, &DiagnosticsRecord::e_pot), 20.0, 70.0);
  }
  const bool near = std::abs(rates[0] - 0.004) <= 0.5 * 0.004;
  const double agree = std::abs(rates[0] - rates[1]) / std::abs(rates[1]);
  return {near && agree <= 0.10,
          fmt("tau0 = 1e4, N_H = %d: E_p envelope rate on [20,70] nonlinear %.5f, linearized %.5f "
              "(target 0.004 +- 50%%; agreement %.1f%%, tol 10%%)",
              nh, rates[0], rates[1], 100.0 * agree)};
}

Verdict criterion10() {
  const int nh = 32;
  const Problem pb = make_problem(smooth_setup(64), nh);
  SimulationParams p = params(1.0, 1.0, 0.1, 30.0, nh, IntegratorKind::linearized);
  const Diagnostics d(pb.ops, p.eps, p.tau0);
  const Beta0Calibration cal = d.calibrate_beta0(pb.initial);
  p.beta0 = cal.beta0;
  const RunResult r = Integrator(pb.ops, p).run(pb.initial);
  bool sandwich = true, half_window = true, monotone = true;
  double lo_ratio = 1e300, hi_ratio = 0.0;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto& x = r.records[i];
    if (x.energy <= 0.0) continue;
    const double ratio = x.h_functional / x.energy;
    lo_ratio = std::min(lo_ratio, ratio);
    hi_ratio = std::max(hi_ratio, ratio);
    if (ratio < 0.25 || ratio > 0.75) sandwich = false;
    if (ratio < 0.5 || ratio > 1.5) half_window = false;
    if (i > 0 && x.h_functional > r.records[i - 1].h_functional * (1.0 + 1e-12)) monotone = false;
  }
  return {sandwich && monotone,
          fmt("beta0 = %.3g (%d halvings): H/E in [%.3f, %.3f] (tol [0.25, 0.75]); H non-increasing: %s; "
              "info: within [1/2, 3/2]: %s",
              cal.beta0, cal.halvings, lo_ratio, hi_ratio, monotone ? "yes" : "NO",
              half_window ? "yes" : "no")};
}

Verdict criterion11() {
  const int nh = 32;
  ExperimentConfig c = smooth_setup(64);
  const Problem pb = make_problem(c, nh);
  const double t_end = 1.0;
  auto run = [&](IntegratorKind kind, double dt) {
    const Integrator integ(pb.ops, params(1.0, 1e2, dt, t_end, nh, kind));
    HermiteState s = pb.initial;
    for (long n = 0; n < std::lround(t_end / dt); ++n) integ.step(s);
    return s.perturbation;
  };
  auto slope = [&](IntegratorKind kind) {
    const Coefficients ref = run(kind, 0.003125);
    std::vector<double> x, y;
    for (double dt : {0.1, 0.05, 0.025}) {
      x.push_back(std::log(dt));
      y.push_back(std::log(wnorm(*pb.ops, run(kind, dt) - ref)));
    }
    const double mx = (x[0] + x[1] + x[2]) / 3.0, my = (y[0] + y[1] + y[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) num += (x[i] - mx) * (y[i] - my), den += (x[i] - mx) * (x[i] - mx);
    return num / den;
  };
  const double lie = slope(IntegratorKind::lie), strang = slope(IntegratorKind::strang);
  return {std::abs(lie - 1.0) <= 0.2 && std::abs(strang - 2.0) <= 0.3,
          fmt("self-convergence slopes: Lie %.3f (1.0 +- 0.2), Strang %.3f (2.0 +- 0.3)", lie, strang)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks (criteria 1-11)"};
  std::vector<int> which;
  bool full = false;
  app.add_option("--criterion,-c", which, "Criteria to run (default: all)")->check(CLI::Range(1, 11));
  app.add_flag("--full", full, "Criterion 8 at N_H = 8000 (hours)");
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  set_log_sink([](const std::string&) {});

  const std::vector<std::function<Verdict()>> checks = {
      criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
      criterion7, [full] { return criterion8(full); }, criterion9, criterion10, criterion11};
  int failures = 0;
  for (int n : which) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = checks[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d: %s  %s  [%.1fs]\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
