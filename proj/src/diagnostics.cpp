#include "vpfp/diagnostics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "vpfp/error.hpp"

namespace vpfp {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "t",     "t_over_eps", "energy", "dissipation", "remainder", "l2_f",  "l2_local", "l2_rho",
      "e_pot", "mode1",      "mode2",  "mode3",       "mode4",     "mass",  "h_functional"};
  return cols;
}

std::vector<double> csv_values(const DiagnosticsRecord& r) {
  return {r.t,        r.t_over_eps, r.energy,   r.dissipation, r.remainder,
          r.l2_f,     r.l2_local,   r.l2_rho,   r.e_pot,       r.modes[0],
          r.modes[1], r.modes[2],   r.modes[3], r.mass,        r.h_functional};
}

Diagnostics::Diagnostics(std::shared_ptr<const TransportOperators> ops, double eps, double tau0)
    : ops_(std::move(ops)), eps_(eps), tau0_(tau0), dx_(ops_->widths()), s_(ops_->sqrt_rho()) {
  elliptic_ = std::make_shared<ConstrainedEllipticSolver>(*ops_, EllipticWeight::unit);
}

double Diagnostics::wnorm2(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return (dx_.array() * u.array().square()).sum();
}

double Diagnostics::energy(const HermiteState& state) const {
  double e = 0.0;
  for (int k = 0; k <= state.n_modes(); ++k) e += wnorm2(state.perturbation.row(k).transpose());
  e += wnorm2(ops_->apply_A(state.omega).cwiseQuotient(s_));
  return 0.5 * e;
}

double Diagnostics::dissipation(const HermiteState& state) const {
  double d = 0.0;
  for (int k = 1; k <= state.n_modes(); ++k) d += k * wnorm2(state.perturbation.row(k).transpose());
  return d / (eps_ * tau0_);
}

double Diagnostics::remainder(const HermiteState& previous, const HermiteState& current,
                              double dt) const {
  double r = 0.0;
  for (int k = 0; k <= current.n_modes(); ++k) {
    r += wnorm2((current.perturbation.row(k) - previous.perturbation.row(k)).transpose() / dt);
  }
  r += wnorm2(ops_->apply_A((current.omega - previous.omega) / dt).cwiseQuotient(s_));
  return 0.5 * r;
}

Eigen::VectorXd Diagnostics::electric_field(const HermiteState& state) const {
  return -std::sqrt(ops_->equilibrium().temperature) * ops_->apply_A(state.omega).cwiseQuotient(s_);
}

DiagnosticsRecord Diagnostics::record(const HermiteState& state) const {
  DiagnosticsRecord r;
  r.t = state.time;
  r.t_over_eps = state.time / eps_;
  double local = 0.0;
  for (int k = 1; k <= state.n_modes(); ++k) local += wnorm2(state.perturbation.row(k).transpose());
  const double rho2 = wnorm2(state.perturbation.row(0).transpose());
  r.l2_local = std::sqrt(local);
  r.l2_rho = std::sqrt(rho2);
  r.l2_f = std::sqrt(local + rho2);
  const Eigen::VectorXd aw = ops_->apply_A(state.omega).cwiseQuotient(s_);
  r.energy = 0.5 * (local + rho2 + wnorm2(aw));
  r.dissipation = dissipation(state);

  const Eigen::VectorXd e = electric_field(state);
  r.e_pot = wnorm2(e);
  const SpatialMesh& mesh = ops_->mesh();
  const double len = mesh.length();
  for (int m = 1; m <= 4; ++m) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < mesh.n_cells(); ++j) {
      const double phase = -2.0 * std::numbers::pi * m * (mesh.center(j) - mesh.a()) / len;
      acc += dx_(j) * e(j) * std::polar(1.0, phase);
    }
    acc *= 2.0 / len;
    r.modes[static_cast<std::size_t>(m - 1)] = std::norm(acc);
  }
  const auto& eq = ops_->equilibrium();
  double mass = 0.0;
  for (int j = 0; j < mesh.n_cells(); ++j) {
    mass += dx_(j) * (eq.rho[static_cast<std::size_t>(j)] + s_(j) * state.perturbation(0, j));
  }
  r.mass = mass;
  if (beta0_) r.h_functional = hypocoercivity(state, *beta0_).h_functional;
  return r;
}

DiagnosticsRecord Diagnostics::record(const HermiteState& state, const HermiteState& previous) const {
  DiagnosticsRecord r = record(state);
  const double dt = state.time - previous.time;
  if (dt > 0.0) r.remainder = remainder(previous, state, dt);
  return r;
}

HypocoercivityRecord Diagnostics::hypocoercivity(const HermiteState& state, double beta0) const {
  if (!(beta0 > 0.0)) throw ConfigError("beta0 must be positive");
  HypocoercivityRecord h;
  h.beta0 = beta0;
  // The kernel part of D_0 is fixed by mass conservation and only roundoff here.
  Eigen::VectorXd d0 = state.perturbation.row(0).transpose();
  ops_->project_off_kernel(d0);
  h.u = elliptic_->solve(d0).x;
  const Eigen::VectorXd as_d1 = ops_->apply_Astar(state.perturbation.row(1).transpose());
  h.cross_term = (dx_.array() * as_d1.array() * h.u.array()).sum();
  h.h_functional = energy(state) + beta0 * h.cross_term;
  return h;
}

Beta0Calibration Diagnostics::calibrate_beta0(const HermiteState& initial, double lo, double hi,
                                              int max_halvings) const {
  // Singular values of A in the dx-weighted norm: W^{1/2} A W^{-1/2}.
  const Eigen::VectorXd sw = dx_.cwiseSqrt();
  const Eigen::MatrixXd aw = sw.asDiagonal() * ops_->dense_A() * sw.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(aw);
  const auto& sv = svd.singularValues();
  const int kdim = ops_->kernel().dimension();
  const double smin = sv(sv.size() - 1 - kdim);

  Beta0Calibration c;
  c.bound_constant = 1.0 / smin;
  const double e0 = energy(initial);
  const HypocoercivityRecord h0 = hypocoercivity(initial, 1.0);
  double beta = 1.0;
  for (int i = 0; i <= max_halvings; ++i, beta *= 0.5) {
    const double hval = e0 + beta * h0.cross_term;
    const bool window = lo * e0 <= hval && hval <= hi * e0;
    if (window && beta * c.bound_constant <= 0.5) {
      c.beta0 = beta;
      c.halvings = i;
      c.window_met_on_initial_state = true;
      return c;
    }
    c.beta0 = beta;
    c.halvings = i;
  }
  c.window_met_on_initial_state = false;
  return c;
}

namespace {

double log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) st += t[i], sy += y[i];
  const double mt = st / n, my = sy / n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (y[i] - my);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return num / den;
}

}  // namespace

double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& value, double t_lo,
                      double t_hi) {
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < t.size() && i < value.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(value[i] > 0.0)) {
      std::ostringstream msg;
      msg << "fit_decay_rate: non-positive value " << value[i] << " at t = " << t[i];
      throw NonPositiveValues(msg.str());
    }
    ts.push_back(t[i]);
    ys.push_back(std::log(value[i]));
  }
  if (ts.size() < 10) {
    throw InsufficientData("fit_decay_rate: " + std::to_string(ts.size()) +
                           " samples in window, need at least 10");
  }
  return -log_slope(ts, ys);
}

double fit_envelope_decay_rate(const std::vector<double>& t, const std::vector<double>& value,
                               double t_lo, double t_hi) {
  std::vector<double> ts, ys;
  const std::size_t n = std::min(t.size(), value.size());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (value[i] >= value[i - 1] && value[i] > value[i + 1]) {
      if (!(value[i] > 0.0)) throw NonPositiveValues("fit_envelope_decay_rate: non-positive peak");
      ts.push_back(t[i]);
      ys.push_back(std::log(value[i]));
    }
  }
  if (ts.size() < 3) {
    throw InsufficientData("fit_envelope_decay_rate: " + std::to_string(ts.size()) +
                           " local maxima in window, need at least 3");
  }
  return -log_slope(ts, ys);
}

}  // namespace vpfp
