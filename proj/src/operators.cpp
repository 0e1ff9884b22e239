#include "vpfp/operators.hpp"

#include <cmath>
#include <sstream>

#include "vpfp/error.hpp"
#include "vpfp/log.hpp"

namespace vpfp {

KernelInfo detect_kernel(const Equilibrium& eq, double parity_tolerance) {
  const SpatialMesh& mesh = eq.mesh;
  const int n = mesh.n_cells();
  const auto& s = eq.sqrt_rho;
  KernelInfo info;
  Eigen::VectorXd dx(n), sv(n);
  for (int j = 0; j < n; ++j) {
    dx(j) = mesh.width(j);
    sv(j) = s[static_cast<std::size_t>(j)];
  }
  if (n % 2 == 0) {
    double alt = 0.0, tot = 0.0;
    for (int j = 0; j < n; ++j) {
      const double g = 1.0 / (s[static_cast<std::size_t>(j)] * s[static_cast<std::size_t>(mesh.neighbor(j, 1))]);
      alt += (j % 2 == 0 ? g : -g);
      tot += g;
    }
    info.alternating_ratio = std::abs(alt) / tot;
    info.parity = info.alternating_ratio <= parity_tolerance;
  }
  auto wnorm = [&](const Eigen::VectorXd& u) { return std::sqrt((dx.array() * u.array().square()).sum()); };
  Eigen::VectorXd e1 = sv / wnorm(sv);
  if (!info.parity) {
    info.basis = e1;
    return info;
  }
  // Second solution of A u = 0: u = s z with z_{j+1} = z_j - (-1)^j / (s_j s_{j+1}).
  Eigen::VectorXd u2(n);
  double z = 0.0;
  for (int j = 0; j < n; ++j) {
    u2(j) = sv(j) * z;
    const double g = 1.0 / (sv(j) * sv(mesh.neighbor(j, 1)));
    z -= (j % 2 == 0 ? g : -g);
  }
  u2 -= (dx.array() * e1.array() * u2.array()).sum() * e1;
  u2 /= wnorm(u2);
  info.basis.resize(n, 2);
  info.basis.col(0) = e1;
  info.basis.col(1) = u2;
  return info;
}

TransportOperators::TransportOperators(Equilibrium eq) : eq_(std::move(eq)) {
  const int n = eq_.n_cells();
  const double sT = std::sqrt(eq_.temperature);
  lower_.resize(static_cast<std::size_t>(n));
  diag_.resize(static_cast<std::size_t>(n));
  upper_.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const double c = sT / (2.0 * eq_.mesh.width(j));
    upper_[jj] = c;
    lower_[jj] = -c;
    diag_[jj] = -eq_.e_field[jj] / (2.0 * sT);
  }
  kernel_ = detect_kernel(eq_);
  if (kernel_.parity) {
    std::ostringstream msg;
    msg << "even N_x = " << n << " with alternating ratio " << kernel_.alternating_ratio
        << ": adding the parity constraint to the elliptic solves";
    log_message(msg.str());
  }
}

Eigen::VectorXd TransportOperators::apply_A(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const int n = n_cells();
  Eigen::VectorXd out(n);
  for (int j = 0; j < n; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    out(j) = upper_[jj] * u((j + 1) % n) + lower_[jj] * u((j + n - 1) % n) + diag_[jj] * u(j);
  }
  return out;
}

Eigen::VectorXd TransportOperators::apply_Astar(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const int n = n_cells();
  Eigen::VectorXd out(n);
  for (int j = 0; j < n; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    out(j) = -upper_[jj] * u((j + 1) % n) - lower_[jj] * u((j + n - 1) % n) + diag_[jj] * u(j);
  }
  return out;
}

Eigen::VectorXd TransportOperators::apply_poisson(const Eigen::Ref<const Eigen::VectorXd>& w) const {
  Eigen::VectorXd aw = apply_A(w);
  for (int j = 0; j < n_cells(); ++j) aw(j) /= eq_.rho[static_cast<std::size_t>(j)];
  return apply_Astar(aw);
}

namespace {

Eigen::SparseMatrix<double> stencil_matrix(const TransportOperators& ops, double sign) {
  const int n = ops.n_cells();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (int j = 0; j < n; ++j) {
    t.emplace_back(j, (j + n - 1) % n, sign * ops.lower(j));
    t.emplace_back(j, j, ops.diag(j));
    t.emplace_back(j, (j + 1) % n, sign * ops.upper(j));
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

Eigen::SparseMatrix<double> TransportOperators::sparse_A() const { return stencil_matrix(*this, 1.0); }
Eigen::SparseMatrix<double> TransportOperators::sparse_Astar() const { return stencil_matrix(*this, -1.0); }
Eigen::MatrixXd TransportOperators::dense_A() const { return Eigen::MatrixXd(sparse_A()); }
Eigen::MatrixXd TransportOperators::dense_Astar() const { return Eigen::MatrixXd(sparse_Astar()); }

Eigen::SparseMatrix<double> TransportOperators::sparse_poisson() const {
  Eigen::VectorXd inv_rho(n_cells());
  for (int j = 0; j < n_cells(); ++j) inv_rho(j) = 1.0 / eq_.rho[static_cast<std::size_t>(j)];
  Eigen::SparseMatrix<double> m = sparse_Astar() * inv_rho.asDiagonal() * sparse_A();
  m.prune(0.0);
  return m;
}

void TransportOperators::project_off_kernel(Eigen::Ref<Eigen::VectorXd> u) const {
  const Eigen::VectorXd dx = widths();
  for (int l = 0; l < kernel_.dimension(); ++l) {
    const auto e = kernel_.basis.col(l);
    u -= (dx.array() * e.array() * u.array()).sum() * e;
  }
}

Eigen::VectorXd TransportOperators::widths() const {
  Eigen::VectorXd dx(n_cells());
  for (int j = 0; j < n_cells(); ++j) dx(j) = eq_.mesh.width(j);
  return dx;
}

Eigen::VectorXd TransportOperators::sqrt_rho() const {
  return Eigen::Map<const Eigen::VectorXd>(eq_.sqrt_rho.data(), n_cells());
}

Border make_border(const TransportOperators& ops, EllipticWeight weight) {
  const int n = ops.n_cells();
  const int nc = ops.kernel().parity ? 2 : 1;
  Border b;
  b.rows.resize(n, nc);
  b.cols.resize(n, nc);
  const Eigen::VectorXd s = ops.sqrt_rho();
  const Eigen::VectorXd dx = ops.widths();
  for (int j = 0; j < n; ++j) {
    const double q = weight == EllipticWeight::inverse_density ? 1.0 / s(j) : s(j);
    b.cols(j, 0) = q;
    b.rows(j, 0) = dx(j) * q;
    if (nc == 2) {
      const double sgn = j % 2 == 0 ? 1.0 : -1.0;
      b.cols(j, 1) = sgn * q;
      b.rows(j, 1) = sgn * dx(j) * q;
    }
  }
  return b;
}

double kernel_component(const TransportOperators& ops, const Eigen::Ref<const Eigen::VectorXd>& rhs) {
  const Eigen::VectorXd dx = ops.widths();
  const double norm = std::sqrt((dx.array() * rhs.array().square()).sum());
  if (norm == 0.0) return 0.0;
  double worst = 0.0;
  for (int l = 0; l < ops.kernel().dimension(); ++l) {
    const double c = (dx.array() * ops.kernel().basis.col(l).array() * rhs.array()).sum();
    worst = std::max(worst, std::abs(c) / norm);
  }
  return worst;
}

ConstrainedEllipticSolver::ConstrainedEllipticSolver(const TransportOperators& ops,
                                                     EllipticWeight weight)
    : kernel_(ops.kernel().basis), widths_(ops.widths()), border_(make_border(ops, weight)) {
  const int n = ops.n_cells();
  const int nc = n_constraints();
  Eigen::MatrixXd a = ops.dense_A();
  Eigen::MatrixXd m(n + nc, n + nc);
  m.setZero();
  if (weight == EllipticWeight::inverse_density) {
    Eigen::VectorXd inv_rho(n);
    for (int j = 0; j < n; ++j) inv_rho(j) = 1.0 / ops.equilibrium().rho[static_cast<std::size_t>(j)];
    m.topLeftCorner(n, n) = ops.dense_Astar() * inv_rho.asDiagonal() * a;
  } else {
    m.topLeftCorner(n, n) = ops.dense_Astar() * a;
  }
  m.topRightCorner(n, nc) = border_.cols;
  m.bottomLeftCorner(nc, n) = border_.rows.transpose();
  lu_.compute(m);
  rcond_ = lu_.rcond();
  if (!(rcond_ > 1e-13)) {
    std::ostringstream msg;
    msg << "constrained elliptic operator is singular beyond its declared kernel (rcond "
        << rcond_ << ", kernel dimension " << nc << ")";
    throw SingularSystem(msg.str());
  }
}

ConstrainedSolution ConstrainedEllipticSolver::solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  const int n = static_cast<int>(widths_.size());
  const int nc = n_constraints();
  const double norm = std::sqrt((widths_.array() * rhs.array().square()).sum());
  if (norm > 0.0) {
    for (int l = 0; l < kernel_.cols(); ++l) {
      const double c = std::abs((widths_.array() * kernel_.col(l).array() * rhs.array()).sum());
      if (c > 1e-10 * norm) {
        std::ostringstream msg;
        msg << "right-hand side is not orthogonal to the kernel (relative component " << c / norm
            << " > 1e-10); check discrete quasi-neutrality";
        throw IncompatibleRhs(msg.str());
      }
    }
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + nc);
  b.head(n) = rhs;
  const Eigen::VectorXd x = lu_.solve(b);
  return {x.head(n), x.tail(nc)};
}

}  // namespace vpfp
