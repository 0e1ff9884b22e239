#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "vpfp/chain_lu.hpp"
#include "vpfp/diagnostics.hpp"
#include "vpfp/stepper_linear.hpp"
#include "vpfp/stepper_nonlinear.hpp"

using namespace vpfp;
using testing::kPi;

namespace {

double mass_functional(const TransportOperators& ops, const HermiteState& s) {
  const Eigen::VectorXd dx = ops.widths(), sr = ops.sqrt_rho();
  double m = 0.0;
  for (int j = 0; j < ops.n_cells(); ++j) m += dx(j) * sr(j) * (sr(j) + s.perturbation(0, j));
  return m;
}

}  // namespace

TEST_CASE("dense assembly oracle: N_H = 1, N_x = 3") {
  auto ops = testing::flat_background(3);
  const double eps = 0.7, tau0 = 3.0, h = 0.2;
  const double dx = 4.0, c = 1.0 / (2.0 * dx);
  const Border border = make_border(*ops, EllipticWeight::inverse_density);
  const Eigen::MatrixXd m = Eigen::MatrixXd(assemble_step_matrix(*ops, border, 1, eps, tau0, h));
  REQUIRE(m.rows() == 10);

  // Central difference (u_{j+1} - u_{j-1}) / (2 dx), periodic; A* = -A on a flat background.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  for (int j = 0; j < 3; ++j) {
    a(j, (j + 1) % 3) += c;
    a(j, (j + 2) % 3) -= c;
  }
  const Eigen::MatrixXd as = -a;
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(10, 10);
  // Unknowns: D_0 (0..2), D_1 (3..5), omega (6..8), lambda (9).
  ref.block(0, 0, 3, 3) = (eps / h) * Eigen::MatrixXd::Identity(3, 3);
  ref.block(0, 3, 3, 3) = -as;
  ref.block(3, 3, 3, 3) = (eps / h + 1.0 / tau0) * Eigen::MatrixXd::Identity(3, 3);
  ref.block(3, 0, 3, 3) = a;
  ref.block(3, 6, 3, 3) = a;
  ref.block(6, 6, 3, 3) = as * a;
  ref.block(6, 0, 3, 3) = -Eigen::MatrixXd::Identity(3, 3);
  ref.block(6, 9, 3, 1).setOnes();
  ref.block(9, 6, 1, 3).setConstant(dx);
  CHECK((m - ref).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("first-mode rows have at most ten nonzeros") {
  auto ops = testing::sine_background(16);
  const Border border = make_border(*ops, EllipticWeight::inverse_density);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> m(assemble_step_matrix(*ops, border, 5, 1.0, 1.0, 0.1));
  const GlobalLayout lay{16, 5, 2};
  for (int j = 0; j < 16; ++j) {
    const int row = lay.d(1, j);
    CHECK(m.outerIndexPtr()[row + 1] - m.outerIndexPtr()[row] <= 10);
  }
}

TEST_CASE("block chain and sparse LU solve the same system") {
  for (int nx : {16, 17}) {
    auto ops = testing::sine_background(nx);
    for (double eps : {1.0, 1e-4}) {
      LinearStepParams p;
      p.eps = eps;
      p.tau0 = 10.0;
      p.dt = 0.1;
      const LinearStepOperator chain(ops, 7, p);
      p.backend = LinearBackend::sparse_lu;
      const LinearStepOperator sparse(ops, 7, p);
      const Eigen::MatrixXd dense = Eigen::MatrixXd(chain.global_matrix());
      std::mt19937 rng(nx);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Eigen::VectorXd rhs(dense.rows());
      for (auto& r : rhs) r = u(rng);
      const Eigen::VectorXd ref = dense.partialPivLu().solve(rhs);
      CHECK((chain.solve_global(rhs) - ref).norm() < 1e-10 * ref.norm());
      CHECK((sparse.solve_global(rhs) - ref).norm() < 1e-10 * ref.norm());
      CHECK((dense * chain.solve_global(rhs) - rhs).norm() < 1e-10 * rhs.norm());
    }
  }
}

TEST_CASE("equilibrium is a fixed point of the linear step") {
  auto ops = testing::sine_background(32);
  for (auto scheme : {LinearScheme::backward_euler, LinearScheme::midpoint, LinearScheme::sdirk2}) {
    LinearStepParams p;
    p.scheme = scheme;
    const LinearStepOperator op(ops, 6, p);
    HermiteState s = equilibrium_state(ops->equilibrium(), 6);
    op.step_inplace(s);
    CHECK(s.perturbation.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.omega.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.time == doctest::Approx(0.1));
  }
}

TEST_CASE("homogeneous modes follow the scalar damping recurrence") {
  auto ops = testing::flat_background(12);
  const double eps = 0.5, tau0 = 2.0, dt = 0.3;
  LinearStepParams p{eps, tau0, dt};
  const LinearStepOperator op(ops, 4, p);
  HermiteState s = equilibrium_state(ops->equilibrium(), 4);
  for (int k = 1; k <= 4; ++k) s.perturbation.row(k).setConstant(0.1 * k);
  op.step_inplace(s);
  for (int k = 1; k <= 4; ++k) {
    const double expected = 0.1 * k / (1.0 + k * dt / (eps * tau0));
    for (int j = 0; j < 12; ++j) CHECK(s.perturbation(k, j) == doctest::Approx(expected).epsilon(1e-13));
  }
  CHECK(s.perturbation.row(0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("one backward-Euler step satisfies the free-energy identity and conserves mass") {
  auto ops = testing::sine_background(64);
  const double dt = 0.1;
  for (double tau0 : {1.0, 1e5}) {
    LinearStepParams p{1.0, tau0, dt};
    const LinearStepOperator op(ops, 24, p);
    const Diagnostics diag(ops, 1.0, tau0);
    HermiteState s = testing::perturbed_state(*ops, 24);
    for (int n = 0; n < 5; ++n) {
      const HermiteState prev = s;
      op.step_inplace(s);
      const double e0 = diag.energy(prev), e1 = diag.energy(s);
      const double res = (e1 - e0) / dt + dt * diag.remainder(prev, s, dt) + diag.dissipation(s);
      CHECK(dt * std::abs(res) / e0 < 1e-11);
      CHECK(std::abs(mass_functional(*ops, s) - mass_functional(*ops, prev)) < 1e-12 * mass_functional(*ops, prev));
    }
  }
}

TEST_CASE("temporal order of the linear schemes") {
  auto ops = testing::sine_background(32);
  const double t_end = 0.4;
  auto run = [&](LinearScheme scheme, double dt) {
    LinearStepParams p{1.0, 1.0, dt, scheme};
    const LinearStepOperator op(ops, 10, p);
    HermiteState s = testing::perturbed_state(*ops, 10);
    for (long n = 0; n < std::lround(t_end / dt); ++n) op.step_inplace(s);
    return s.perturbation;
  };
  const Coefficients ref = run(LinearScheme::sdirk2, 0.4 / 512);
  for (auto [scheme, order] : {std::pair{LinearScheme::backward_euler, 1.0},
                               std::pair{LinearScheme::midpoint, 2.0},
                               std::pair{LinearScheme::sdirk2, 2.0}}) {
    const double e1 = (run(scheme, 0.05) - ref).norm();
    const double e2 = (run(scheme, 0.025) - ref).norm();
    CHECK(std::log2(e1 / e2) == doctest::Approx(order).epsilon(0.2));
  }
}

TEST_CASE("matrix market dump") {
  auto ops = testing::flat_background(5);
  const LinearStepOperator op(ops, 2, LinearStepParams{});
  const auto path = std::filesystem::temp_directory_path() / "vpfp_unit_matrix.mtx";
  op.dump_matrix_market(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  long rows = 0, cols = 0, nnz = 0;
  in >> rows >> cols >> nnz;
  CHECK(rows == op.layout().size());
  CHECK(nnz == op.global_matrix().nonZeros());
  std::filesystem::remove(path);
}

TEST_CASE("prepare_initial_state makes the state quasi-neutral") {
  auto ops = testing::sine_background(32);
  HermiteState s = equilibrium_state(ops->equilibrium(), 3);
  s.perturbation.row(0).setConstant(0.05);
  prepare_initial_state(s, *ops);
  CHECK(kernel_component(*ops, s.perturbation.row(0).transpose()) < 1e-13);
  CHECK((ops->apply_poisson(s.omega) - s.perturbation.row(0).transpose()).norm() < 1e-12);
}

TEST_CASE("nonlinear substitution: hand oracle") {
  Coefficients p(4, 1);
  p << 1.0, 1.0, 1.0, 1.0;  // D = (2, 1, 1, 1), D_inf = (1, 0, 0, 0)
  nonlinear_substitution(p, Eigen::VectorXd::Ones(1), 1.0, 1.0, NonlinearScheme::backward_euler);
  CHECK(p(0, 0) == 1.0);
  CHECK(p(1, 0) == doctest::Approx(0.0));
  CHECK(p(2, 0) == doctest::Approx(1.0));
  CHECK(p(3, 0) == doctest::Approx(1.0 - std::sqrt(3.0)));

  // Dense lower-triangular oracle for the trapezoidal form.
  Coefficients q(4, 1);
  q << 0.3, -0.2, 0.5, 0.1;
  const double g = 0.7, c = 0.5 * g;
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd rhs(3);
  for (int k = 1; k <= 3; ++k) {
    rhs(k - 1) = q(k, 0) - std::sqrt(k) * c * q(k - 1, 0);
    if (k == 1) rhs(0) -= std::sqrt(1.0) * c * q(0, 0);
    else l(k - 1, k - 2) = std::sqrt(k) * c;
  }
  const Eigen::VectorXd x = l.triangularView<Eigen::Lower>().solve(rhs);
  nonlinear_substitution(q, Eigen::VectorXd::Constant(1, g), 1.0, 1.0, NonlinearScheme::trapezoidal);
  for (int k = 1; k <= 3; ++k) CHECK(q(k, 0) == doctest::Approx(x(k - 1)).epsilon(1e-14));
}

TEST_CASE("nonlinear step is the identity at zero field or at equilibrium") {
  auto ops = testing::sine_background(16);
  HermiteState s = testing::perturbed_state(*ops, 5);
  s.perturbation.row(2).setConstant(0.01);
  HermiteState z = s;
  z.omega.setZero();
  CHECK(nonlinear_step(z, *ops, 0.1, 1.0, NonlinearScheme::backward_euler).perturbation == z.perturbation);

  HermiteState e = equilibrium_state(ops->equilibrium(), 5);
  e.omega = s.omega;
  for (auto scheme : {NonlinearScheme::backward_euler, NonlinearScheme::trapezoidal}) {
    CHECK(nonlinear_step(e, *ops, 0.1, 1.0, scheme).perturbation.cwiseAbs().maxCoeff() == 0.0);
  }
  const HermiteState t = nonlinear_step(s, *ops, 0.1, 1.0, NonlinearScheme::trapezoidal);
  CHECK(t.perturbation.row(0) == s.perturbation.row(0));
  CHECK(t.omega == s.omega);
}
