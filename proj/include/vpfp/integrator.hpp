#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vpfp/diagnostics.hpp"
#include "vpfp/stepper_linear.hpp"
#include "vpfp/stepper_nonlinear.hpp"

namespace vpfp {

enum class IntegratorKind {
  /// linear(dt) then nonlinear(dt), both backward Euler
  lie,
  /// linear(dt/2), nonlinear(dt), linear(dt/2); second-order substeps
  strang,
  /// linear step only
  linearized,
};

std::string to_string(IntegratorKind k);
IntegratorKind parse_integrator(const std::string& s);

struct SimulationParams {
  double eps = 1.0;
  double tau0 = 1.0;
  double dt = 0.1;
  /// Time given to the initial state by the experiment drivers.
  double t_start = 0.0;
  double t_end = 1.0;
  int n_modes = 1;
  IntegratorKind integrator = IntegratorKind::strang;
  int diag_every = 1;
  std::vector<double> snapshot_times;
  /// Linear substep scheme; default backward Euler for lie/linearized, sdirk2 for strang.
  std::optional<LinearScheme> linear_scheme;
  /// Nonlinear substep scheme; default backward Euler for lie, trapezoidal for strang.
  std::optional<NonlinearScheme> nonlinear_scheme;
  LinearBackend backend = LinearBackend::block_chain;
  double pivot_threshold = 1.0;
  std::optional<bool> equilibrate;
  /// Evaluate the modified entropy with this beta0 in every record.
  std::optional<double> beta0;

  LinearScheme effective_linear_scheme() const;
  NonlinearScheme effective_nonlinear_scheme() const;
};

struct RunSinks {
  std::function<void(const DiagnosticsRecord&)> on_record;
  /// Called at the completed step nearest to each requested time.
  std::function<void(const HermiteState&, double requested_time)> on_snapshot;
  std::function<void(long step, long total)> on_progress;
};

struct RunResult {
  HermiteState final_state;
  std::vector<DiagnosticsRecord> records;
  long steps = 0;
};

class Integrator {
 public:
  Integrator(std::shared_ptr<const TransportOperators> ops, SimulationParams params);

  const SimulationParams& params() const noexcept { return params_; }
  const LinearStepOperator& linear_operator() const noexcept { return *linear_; }
  const Diagnostics& diagnostics() const noexcept { return diag_; }
  const TransportOperators& ops() const noexcept { return *ops_; }

  /// One full step of length params().dt.
  void step(HermiteState& state) const;

  /// Integrates from initial.time to t_end (params().t_end by default). The initial state is
  /// used as given; call prepare_initial_state first for raw projections.
  RunResult run(HermiteState initial, const RunSinks& sinks = {}) const;
  RunResult run(HermiteState initial, double t_end, const RunSinks& sinks = {}) const;

 private:
  std::shared_ptr<const TransportOperators> ops_;
  SimulationParams params_;
  std::unique_ptr<LinearStepOperator> linear_;
  Diagnostics diag_;
};

struct EchoSetup {
  double delta = 0.01;
  double k1 = 0.0;
  double k2 = 0.0;
  double t0 = -30.0;
  double t_end = 120.0;
};

struct EchoResult {
  RunResult phase1;
  RunResult phase2;
  double factorization_seconds = 0.0;
};

/// Two-phase echo protocol on a uniform background: phase 1 evolves (1 + delta cos(k1 x)) M
/// from t0 to 0, then delta cos(k2 x) is added to the density mode and phase 2 runs to t_end.
/// Both phases share one factorization. params.t_end is ignored.
EchoResult run_echo_protocol(std::shared_ptr<const TransportOperators> ops,
                             const SimulationParams& params, const EchoSetup& setup,
                             const RunSinks& phase1_sinks = {}, const RunSinks& phase2_sinks = {});

/// Same protocol from a given phase-1 state (projected raw; its time is set to setup.t0).
EchoResult run_echo_protocol(std::shared_ptr<const TransportOperators> ops,
                             const SimulationParams& params, const EchoSetup& setup,
                             HermiteState initial, const RunSinks& phase1_sinks = {},
                             const RunSinks& phase2_sinks = {});

}  // namespace vpfp
