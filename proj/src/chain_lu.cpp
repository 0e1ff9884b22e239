#include "vpfp/chain_lu.hpp"

#include <cmath>
#include <sstream>

#include "vpfp/error.hpp"

namespace vpfp {

namespace {

void check_factor(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, long first_index) {
  const double rc = lu.rcond();
  if (!(rc > 1e-15) || !std::isfinite(rc)) {
    std::ostringstream msg;
    msg << "block LU breakdown in the block starting at unknown " << first_index
        << " (reciprocal condition " << rc
        << "); for small eps try the sparse backend with a lower pivot threshold and "
           "equilibration disabled";
    throw FactorizationFailure(msg.str(), first_index);
  }
}

}  // namespace

BlockChainLU::BlockChainLU(const TransportOperators& ops, const Border& border, int n_modes,
                           double diag0, double diag_slope)
    : layout_{ops.n_cells(), n_modes, static_cast<int>(border.rows.cols())},
      a_(ops.sparse_A()),
      astar_(ops.sparse_Astar()) {
  const int n = layout_.n_cells;
  const int nh = n_modes;
  const int nc = layout_.n_constraints;
  chain_.resize(static_cast<std::size_t>(nh) + 1);

  const Eigen::MatrixXd a_dense = ops.dense_A();
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n) * (diag0 + nh * diag_slope);
  for (int k = nh; k >= 1; --k) {
    auto& lu = chain_[static_cast<std::size_t>(k)];
    lu.compute(s);
    check_factor(lu, layout_.d(k, 0));
    if (k == 1) break;
    // S_{k-1} = a_{k-1} I + k A* S_k^{-1} A
    const Eigen::MatrixXd y = lu.solve(a_dense);
    s = astar_ * y;
    s *= static_cast<double>(k);
    s.diagonal().array() += diag0 + (k - 1) * diag_slope;
  }

  // Head block on (D_0, omega, lambda).
  const int m0 = 2 * n + nc;
  Eigen::MatrixXd b0 = Eigen::MatrixXd::Zero(m0, m0);
  const Eigen::MatrixXd t = astar_ * chain_[1].solve(a_dense);  // A* S_1^{-1} A
  b0.topLeftCorner(n, n) = t;
  b0.topLeftCorner(n, n).diagonal().array() += diag0;
  b0.block(0, n, n, n) = t;
  b0.block(n, 0, n, n) = -Eigen::MatrixXd::Identity(n, n);
  b0.block(n, n, n, n) = Eigen::MatrixXd(ops.sparse_poisson());
  b0.block(n, 2 * n, n, nc) = border.cols;
  b0.block(2 * n, n, nc, n) = border.rows.transpose();
  head_.compute(b0);
  check_factor(head_, 0);
}

Eigen::VectorXd BlockChainLU::solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  const int n = layout_.n_cells;
  const int nh = layout_.n_modes;
  const int nc = layout_.n_constraints;
  auto seg = [&](const auto& v, int k) { return v.segment(layout_.d(k, 0), n); };

  // Forward elimination from the top mode down: g_k = r_k + sqrt(k+1) A* S_{k+1}^{-1} g_{k+1}.
  std::vector<Eigen::VectorXd> g(static_cast<std::size_t>(nh) + 1);
  g[static_cast<std::size_t>(nh)] = seg(rhs, nh);
  for (int k = nh - 1; k >= 1; --k) {
    const Eigen::VectorXd y = chain_[static_cast<std::size_t>(k) + 1].solve(g[static_cast<std::size_t>(k) + 1]);
    g[static_cast<std::size_t>(k)] = seg(rhs, k) + std::sqrt(k + 1.0) * (astar_ * y);
  }
  Eigen::VectorXd g0(2 * n + nc);
  g0.head(n) = seg(rhs, 0) + astar_ * chain_[1].solve(g[1]);
  g0.segment(n, n) = rhs.segment(layout_.omega(0), n);
  g0.tail(nc) = rhs.segment(layout_.lambda(0), nc);

  const Eigen::VectorXd x0 = head_.solve(g0);
  Eigen::VectorXd out(layout_.size());
  out.segment(layout_.d(0, 0), n) = x0.head(n);
  out.segment(layout_.omega(0), n) = x0.segment(n, n);
  out.segment(layout_.lambda(0), nc) = x0.tail(nc);

  // Back substitution upward: x_k = S_k^{-1} (g_k - L_k x_{k-1}).
  Eigen::VectorXd prev = a_ * (x0.head(n) + x0.segment(n, n));
  for (int k = 1; k <= nh; ++k) {
    Eigen::VectorXd xk = chain_[static_cast<std::size_t>(k)].solve(g[static_cast<std::size_t>(k)] - prev);
    if (k < nh) prev = std::sqrt(k + 1.0) * (a_ * xk);
    out.segment(layout_.d(k, 0), n) = std::move(xk);
  }
  return out;
}

}  // namespace vpfp
