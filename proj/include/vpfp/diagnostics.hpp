#pragma once

#include <array>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vpfp/hermite.hpp"
#include "vpfp/operators.hpp"

namespace vpfp {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct DiagnosticsRecord {
  double t = 0.0;
  double t_over_eps = 0.0;
  /// 1/2 (sum_k ||D_k - D_inf,k||^2 + ||A omega / sqrt(rho_inf)||^2)
  double energy = 0.0;
  /// 1/(eps tau0) sum_{k>=1} k ||D_k||^2
  double dissipation = 0.0;
  /// 1/2 (||dD/dt||^2 + ||A d omega / (dt sqrt(rho_inf))||^2) over the step ending at t; NaN on
  /// the first row.
  double remainder = kNaN;
  double l2_f = 0.0;
  double l2_local = 0.0;
  double l2_rho = 0.0;
  /// sum_j dx_j E_j^2, E_j = -sqrt(T0) (A omega)_j / sqrt(rho_inf,j)
  double e_pot = 0.0;
  /// |E_m|^2 for m = 1..4, E_m = 2/(b-a) sum_j dx_j E_j exp(-2 pi i m (x_j - a)/(b-a))
  std::array<double, 4> modes{};
  /// sum_j dx_j sqrt(rho_inf,j) D_0,j
  double mass = 0.0;
  /// E + beta0 <A* D_1, u>; NaN when not requested.
  double h_functional = kNaN;
};

/// CSV column names, in order.
const std::vector<std::string>& csv_columns();
std::vector<double> csv_values(const DiagnosticsRecord& r);

struct HypocoercivityRecord {
  Eigen::VectorXd u;
  double cross_term = 0.0;  // <A* D_1, u>
  double h_functional = 0.0;
  double beta0 = 0.0;
};

struct Beta0Calibration {
  double beta0 = 1.0;
  int halvings = 0;
  /// 1 / (smallest nonzero singular value of A): |<A* D_1, u>| <= C E for every state.
  double bound_constant = 0.0;
  bool window_met_on_initial_state = false;
};

class Diagnostics {
 public:
  Diagnostics(std::shared_ptr<const TransportOperators> ops, double eps, double tau0);

  DiagnosticsRecord record(const HermiteState& state) const;
  /// Fills remainder from the previous state (dt = current.time - previous.time).
  DiagnosticsRecord record(const HermiteState& state, const HermiteState& previous) const;

  double energy(const HermiteState& state) const;
  double dissipation(const HermiteState& state) const;
  double remainder(const HermiteState& previous, const HermiteState& current, double dt) const;
  /// E_j = -sqrt(T0) (A omega)_j / sqrt(rho_inf,j)
  Eigen::VectorXd electric_field(const HermiteState& state) const;

  /// u with A* A u = D_0 - sqrt(rho_inf), sum dx u sqrt(rho_inf) = 0; H = E + beta0 <A* D_1, u>.
  HypocoercivityRecord hypocoercivity(const HermiteState& state, double beta0) const;

  /// Halves beta0 from 1 until lo E <= H <= hi E on `initial` and beta0 C <= 1/2 (which keeps
  /// H within [E/2, 3E/2] for every state). Stops after max_halvings.
  Beta0Calibration calibrate_beta0(const HermiteState& initial, double lo = 0.5, double hi = 1.5,
                                   int max_halvings = 60) const;

  const TransportOperators& ops() const noexcept { return *ops_; }
  double eps() const noexcept { return eps_; }
  double tau0() const noexcept { return tau0_; }
  void set_beta0(std::optional<double> beta0) { beta0_ = beta0; }
  std::optional<double> beta0() const noexcept { return beta0_; }

 private:
  double wnorm2(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  std::shared_ptr<const TransportOperators> ops_;
  double eps_, tau0_;
  Eigen::VectorXd dx_, s_;
  std::shared_ptr<const ConstrainedEllipticSolver> elliptic_;
  std::optional<double> beta0_;
};

/// Least-squares slope of log(value) against t over samples with t in [t_lo, t_hi], negated.
/// Throws InsufficientData (fewer than 10 samples) or NonPositiveValues.
double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& value, double t_lo,
                      double t_hi);

/// Same fit restricted to the local maxima of value inside the window (needs >= 3 maxima).
double fit_envelope_decay_rate(const std::vector<double>& t, const std::vector<double>& value,
                               double t_lo, double t_hi);

}  // namespace vpfp
