#include "vpfp/stepper_linear.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <regex>

#include "vpfp/error.hpp"

namespace vpfp {

namespace {
const double kSdirkGamma = 1.0 - 1.0 / std::sqrt(2.0);
}

std::string to_string(LinearScheme s) {
  switch (s) {
    case LinearScheme::backward_euler: return "backward_euler";
    case LinearScheme::midpoint: return "midpoint";
    case LinearScheme::sdirk2: return "sdirk2";
  }
  return "?";
}

std::string to_string(LinearBackend b) {
  return b == LinearBackend::block_chain ? "block_chain" : "sparse_lu";
}

LinearScheme parse_linear_scheme(const std::string& s) {
  if (s == "backward_euler") return LinearScheme::backward_euler;
  if (s == "midpoint") return LinearScheme::midpoint;
  if (s == "sdirk2") return LinearScheme::sdirk2;
  throw ConfigError("unknown linear scheme '" + s + "' (backward_euler, midpoint, sdirk2)");
}

LinearBackend parse_linear_backend(const std::string& s) {
  if (s == "block_chain") return LinearBackend::block_chain;
  if (s == "sparse_lu") return LinearBackend::sparse_lu;
  throw ConfigError("unknown linear backend '" + s + "' (block_chain, sparse_lu)");
}

Eigen::SparseMatrix<double> assemble_step_matrix(const TransportOperators& ops, const Border& border,
                                                 int n_modes, double eps, double tau0, double h) {
  const int n = ops.n_cells();
  const int nc = static_cast<int>(border.rows.cols());
  const GlobalLayout lay{n, n_modes, nc};
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n) * (7 * (n_modes + 1) + 3 + 8) + 2 * n * nc);
  for (int k = 0; k <= n_modes; ++k) {
    const double sk = std::sqrt(static_cast<double>(k));
    const double sk1 = std::sqrt(k + 1.0);
    for (int j = 0; j < n; ++j) {
      const int row = lay.d(k, j);
      const int jm = (j + n - 1) % n, jp = (j + 1) % n;
      t.emplace_back(row, row, eps / h + k / tau0);
      if (k >= 1) {
        t.emplace_back(row, lay.d(k - 1, jm), sk * ops.lower(j));
        t.emplace_back(row, lay.d(k - 1, j), sk * ops.diag(j));
        t.emplace_back(row, lay.d(k - 1, jp), sk * ops.upper(j));
      }
      if (k < n_modes) {
        // -sqrt(k+1) A*: A* has (-lower, diag, -upper).
        t.emplace_back(row, lay.d(k + 1, jm), sk1 * ops.lower(j));
        t.emplace_back(row, lay.d(k + 1, j), -sk1 * ops.diag(j));
        t.emplace_back(row, lay.d(k + 1, jp), sk1 * ops.upper(j));
      }
      if (k == 1) {
        t.emplace_back(row, lay.omega(jm), ops.lower(j));
        t.emplace_back(row, lay.omega(j), ops.diag(j));
        t.emplace_back(row, lay.omega(jp), ops.upper(j));
      }
    }
  }
  const Eigen::SparseMatrix<double> lp = ops.sparse_poisson();
  for (int col = 0; col < lp.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(lp, col); it; ++it) {
      t.emplace_back(lay.omega(static_cast<int>(it.row())), lay.omega(static_cast<int>(it.col())), it.value());
    }
  }
  for (int j = 0; j < n; ++j) {
    t.emplace_back(lay.omega(j), lay.d(0, j), -1.0);
    for (int l = 0; l < nc; ++l) {
      t.emplace_back(lay.omega(j), lay.lambda(l), border.cols(j, l));
      t.emplace_back(lay.lambda(l), lay.omega(j), border.rows(j, l));
    }
  }
  Eigen::SparseMatrix<double> m(lay.size(), lay.size());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void write_matrix_market(const std::filesystem::path& path, const Eigen::SparseMatrix<double>& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open matrix file " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out << std::setprecision(17);
  for (int col = 0; col < m.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
  if (!out) throw IoError("failed writing matrix file " + path.string());
}

struct LinearStepOperator::SparseBackend {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::VectorXd row_scale;
};

LinearStepOperator::LinearStepOperator(std::shared_ptr<const TransportOperators> ops, int n_modes,
                                       LinearStepParams params)
    : ops_(std::move(ops)), params_(params) {
  if (!(params_.eps > 0.0) || !(params_.tau0 > 0.0) || !(params_.dt > 0.0)) {
    throw ConfigError("linear step requires eps > 0, tau0 > 0 and dt > 0");
  }
  if (n_modes < 1) throw ConfigError("linear step requires n_modes >= 1");
  border_ = make_border(*ops_, EllipticWeight::inverse_density);
  layout_ = GlobalLayout{ops_->n_cells(), n_modes, static_cast<int>(border_.rows.cols())};
  switch (params_.scheme) {
    case LinearScheme::backward_euler: h_ = params_.dt; break;
    case LinearScheme::midpoint: h_ = 0.5 * params_.dt; break;
    case LinearScheme::sdirk2: h_ = kSdirkGamma * params_.dt; break;
  }
  const auto t0 = std::chrono::steady_clock::now();
  if (params_.backend == LinearBackend::block_chain) {
    chain_ = std::make_unique<BlockChainLU>(*ops_, border_, n_modes, params_.eps / h_,
                                            1.0 / params_.tau0);
  } else {
    sparse_ = std::make_unique<SparseBackend>();
    Eigen::SparseMatrix<double> m = global_matrix();
    const bool equil = params_.equilibrate.value_or(params_.eps >= 1e-3);
    sparse_->row_scale = Eigen::VectorXd::Ones(m.rows());
    if (equil) {
      Eigen::VectorXd rmax = Eigen::VectorXd::Zero(m.rows());
      for (int col = 0; col < m.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it) {
          rmax(it.row()) = std::max(rmax(it.row()), std::abs(it.value()));
        }
      }
      for (int i = 0; i < m.rows(); ++i) sparse_->row_scale(i) = rmax(i) > 0.0 ? 1.0 / rmax(i) : 1.0;
      m = sparse_->row_scale.asDiagonal() * m;
    }
    sparse_->lu.setPivotThreshold(params_.pivot_threshold);
    sparse_->lu.analyzePattern(m);
    sparse_->lu.factorize(m);
    if (sparse_->lu.info() != Eigen::Success) {
      const std::string what = sparse_->lu.lastErrorMessage();
      long pivot = -1;
      std::smatch match;
      if (std::regex_search(what, match, std::regex("([0-9]+)"))) pivot = std::stol(match[1]);
      throw FactorizationFailure(
          "sparse LU failed: " + what +
              "; for small eps disable equilibration and tune the pivot threshold",
          pivot);
    }
  }
  factor_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LinearStepOperator::~LinearStepOperator() = default;
LinearStepOperator::LinearStepOperator(LinearStepOperator&&) noexcept = default;
LinearStepOperator& LinearStepOperator::operator=(LinearStepOperator&&) noexcept = default;

Eigen::SparseMatrix<double> LinearStepOperator::global_matrix() const {
  return assemble_step_matrix(*ops_, border_, layout_.n_modes, params_.eps, params_.tau0, h_);
}

void LinearStepOperator::dump_matrix_market(const std::filesystem::path& path) const {
  write_matrix_market(path, global_matrix());
}

Eigen::VectorXd LinearStepOperator::solve_global(const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  if (chain_) return chain_->solve(rhs);
  const Eigen::VectorXd b = sparse_->row_scale.cwiseProduct(rhs);
  return sparse_->lu.solve(b);
}

void LinearStepOperator::be_solve(const Coefficients& start, Coefficients& out,
                                  Eigen::VectorXd& omega) const {
  const int n = layout_.n_cells;
  const double c = params_.eps / h_;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(layout_.size());
  for (int k = 0; k <= layout_.n_modes; ++k) {
    rhs.segment(layout_.d(k, 0), n) = c * start.row(k).transpose();
  }
  const Eigen::VectorXd x = solve_global(rhs);
  out.resize(layout_.n_modes + 1, n);
  for (int k = 0; k <= layout_.n_modes; ++k) out.row(k) = x.segment(layout_.d(k, 0), n).transpose();
  omega = x.segment(layout_.omega(0), n);
}

void LinearStepOperator::step_inplace(HermiteState& state) const {
  if (state.n_modes() != layout_.n_modes || state.n_cells() != layout_.n_cells) {
    throw ConfigError("state dimensions do not match the linear step operator");
  }
  Coefficients y;
  Eigen::VectorXd w;
  switch (params_.scheme) {
    case LinearScheme::backward_euler:
      be_solve(state.perturbation, state.perturbation, w);
      state.omega = w;
      break;
    case LinearScheme::midpoint:
      be_solve(state.perturbation, y, w);
      state.perturbation = 2.0 * y - state.perturbation;
      state.omega = 2.0 * w - state.omega;
      break;
    case LinearScheme::sdirk2: {
      be_solve(state.perturbation, y, w);
      const Coefficients z = state.perturbation + ((1.0 - kSdirkGamma) / kSdirkGamma) * (y - state.perturbation);
      be_solve(z, state.perturbation, w);
      state.omega = w;
      break;
    }
  }
  state.time += params_.dt;
}

HermiteState LinearStepOperator::step(const HermiteState& state) const {
  HermiteState out = state;
  step_inplace(out);
  return out;
}

void prepare_initial_state(HermiteState& state, const TransportOperators& ops) {
  Eigen::VectorXd d0 = state.perturbation.row(0).transpose();
  ops.project_off_kernel(d0);
  state.perturbation.row(0) = d0.transpose();
  const ConstrainedEllipticSolver poisson(ops, EllipticWeight::inverse_density);
  state.omega = poisson.solve(d0).x;
}

}  // namespace vpfp
