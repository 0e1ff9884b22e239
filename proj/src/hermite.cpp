#include "vpfp/hermite.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "vpfp/error.hpp"
#include "vpfp/log.hpp"
#include "vpfp/quadrature.hpp"

namespace vpfp {

HermiteState equilibrium_state(const Equilibrium& eq, int n_modes, double time) {
  if (n_modes < 1) throw ConfigError("number of Hermite modes must be >= 1");
  HermiteState s;
  s.perturbation = Coefficients::Zero(n_modes + 1, eq.n_cells());
  s.omega = Eigen::VectorXd::Zero(eq.n_cells());
  s.time = time;
  return s;
}

Coefficients coefficients(const HermiteState& state, const Equilibrium& eq) {
  Coefficients d = state.perturbation;
  for (int j = 0; j < d.cols(); ++j) d(0, j) += eq.sqrt_rho[static_cast<std::size_t>(j)];
  return d;
}

HermiteState state_from_coefficients(const Coefficients& d, const Equilibrium& eq, double time) {
  if (d.cols() != eq.n_cells() || d.rows() < 2) {
    throw ConfigError("coefficient matrix must be (N_H+1) x N_x with N_H >= 1");
  }
  HermiteState s;
  s.perturbation = d;
  for (int j = 0; j < d.cols(); ++j) s.perturbation(0, j) -= eq.sqrt_rho[static_cast<std::size_t>(j)];
  s.omega = Eigen::VectorXd::Zero(d.cols());
  s.time = time;
  return s;
}

std::vector<double> eval_hermite_functions(const HermiteBasis& basis, double v, int k_max) {
  if (k_max < 0) return {};
  const double T0 = basis.temperature;
  const double xi = v / std::sqrt(T0);
  const double log_base = -0.5 * xi * xi - 0.5 * std::log(2.0 * std::numbers::pi * T0);
  constexpr double kBig = 1e150;
  const double log_big = std::log(kBig);

  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  auto emit = [&](std::size_t k, double p, double shift) {
    if (p == 0.0) {
      out[k] = 0.0;
      return;
    }
    const double mag = std::exp(std::log(std::abs(p)) + log_base + shift);
    out[k] = p < 0.0 ? -mag : mag;
  };
  double shift = 0.0;
  double pm = 0.0, p = 1.0;
  emit(0, p, shift);
  for (int k = 0; k < k_max; ++k) {
    double pn = (xi * p - std::sqrt(static_cast<double>(k)) * pm) / std::sqrt(k + 1.0);
    pm = p;
    p = pn;
    if (std::abs(p) > kBig) {
      p /= kBig;
      pm /= kBig;
      shift += log_big;
    }
    emit(static_cast<std::size_t>(k) + 1, p, shift);
  }
  return out;
}

std::vector<double> eval_hermite_polynomials(double xi, int k_max, double weight) {
  if (k_max < 0) return {};
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  double pm = 0.0, p = weight;
  out[0] = p;
  for (int k = 0; k < k_max; ++k) {
    const double pn = (xi * p - std::sqrt(static_cast<double>(k)) * pm) / std::sqrt(k + 1.0);
    pm = p;
    p = pn;
    out[static_cast<std::size_t>(k) + 1] = p;
  }
  return out;
}

HermiteState project_modes(const ModeClosures& closures, const Equilibrium& eq, int n_modes,
                           int quadrature_order) {
  HermiteState s = equilibrium_state(eq, n_modes);
  const int kmax = std::min<int>(static_cast<int>(closures.size()) - 1, n_modes);
  for (int k = 0; k <= kmax; ++k) {
    if (!closures[static_cast<std::size_t>(k)]) continue;
    const std::vector<double> c = cell_average(closures[static_cast<std::size_t>(k)], eq.mesh,
                                               quadrature_order);
    for (int j = 0; j < eq.n_cells(); ++j) {
      const auto jj = static_cast<std::size_t>(j);
      // The division is done on the full coefficient, then the equilibrium is removed.
      s.perturbation(k, j) = c[jj] / eq.sqrt_rho[jj] - (k == 0 ? eq.sqrt_rho[jj] : 0.0);
    }
  }
  return s;
}

double tail_fraction(const Coefficients& d, const SpatialMesh& mesh) {
  const int nh = static_cast<int>(d.rows()) - 1;
  const double cut = 0.9 * nh;
  double tail = 0.0, total = 0.0;
  for (int k = 0; k <= nh; ++k) {
    double e = 0.0;
    for (int j = 0; j < d.cols(); ++j) e += mesh.width(j) * d(k, j) * d(k, j);
    total += e;
    if (k > cut) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

HermiteState project_modulated_maxwellian(const std::function<double(double, double)>& h,
                                          const Equilibrium& eq, int n_modes, int quad_order,
                                          int cell_order, ProjectionReport* report) {
  if (quad_order < 1) throw ConfigError("velocity quadrature order must be >= 1");
  const QuadratureRule gh = gauss_hermite_normal(quad_order);
  const QuadratureRule gl = gauss_legendre(cell_order);
  const double sT = std::sqrt(eq.temperature);
  const auto nq = gh.nodes.size();

  // table(i, k) = sqrt(w_i) H_k(xi_i)
  Eigen::MatrixXd table(static_cast<Eigen::Index>(nq), n_modes + 1);
  std::vector<double> sw(nq);
  for (std::size_t i = 0; i < nq; ++i) {
    sw[i] = std::sqrt(gh.weights[i]);
    const auto row = eval_hermite_polynomials(gh.nodes[i], n_modes, sw[i]);
    for (int k = 0; k <= n_modes; ++k) table(static_cast<Eigen::Index>(i), k) = row[static_cast<std::size_t>(k)];
  }

  Coefficients d = Coefficients::Zero(n_modes + 1, eq.n_cells());
  Eigen::VectorXd hv(static_cast<Eigen::Index>(nq));
  const auto xi = eq.mesh.interfaces();
  for (int j = 0; j < eq.n_cells(); ++j) {
    const double lo = xi[static_cast<std::size_t>(j)], hi = xi[static_cast<std::size_t>(j) + 1];
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_modes + 1);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double x = mid + half * gl.nodes[q];
      for (std::size_t i = 0; i < nq; ++i) {
        hv(static_cast<Eigen::Index>(i)) = sw[i] * h(x, sT * gh.nodes[i]);
      }
      acc.noalias() += 0.5 * gl.weights[q] * (table.transpose() * hv);
    }
    for (int k = 0; k <= n_modes; ++k) d(k, j) = acc(k) / eq.sqrt_rho[static_cast<std::size_t>(j)];
  }

  const double tf = tail_fraction(d, eq.mesh);
  const bool under = tf > 1e-8;
  if (under) {
    std::ostringstream msg;
    msg << "projection may be under-resolved: tail coefficient fraction " << std::setprecision(3)
        << tf << " exceeds 1e-8 (N_H = " << n_modes << ")";
    log_message(msg.str());
  }
  if (report) *report = {tf, under};
  return state_from_coefficients(d, eq);
}

Eigen::MatrixXd reconstruct(const HermiteState& state, const Equilibrium& eq,
                            const std::vector<double>& v_grid) {
  const int nh = state.n_modes();
  const HermiteBasis basis{eq.temperature, nh};
  Eigen::MatrixXd psi(nh + 1, static_cast<Eigen::Index>(v_grid.size()));
  for (std::size_t m = 0; m < v_grid.size(); ++m) {
    if (!std::isfinite(v_grid[m])) throw ConfigError("reconstruct: velocity grid must be finite");
    const auto col = eval_hermite_functions(basis, v_grid[m], nh);
    for (int k = 0; k <= nh; ++k) psi(k, static_cast<Eigen::Index>(m)) = col[static_cast<std::size_t>(k)];
  }
  const Coefficients d = coefficients(state, eq);
  Eigen::MatrixXd f = d.transpose() * psi;
  for (int j = 0; j < eq.n_cells(); ++j) f.row(j) *= eq.sqrt_rho[static_cast<std::size_t>(j)];
  return f;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  if (n == 1) out[0] = lo;
  for (int i = 0; n > 1 && i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

void write_snapshot_csv(const std::filesystem::path& path, const std::vector<double>& x,
                        const std::vector<double>& v, const Eigen::MatrixXd& f) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open snapshot file " + path.string());
  out << std::setprecision(17) << "x,v,f\n";
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t m = 0; m < v.size(); ++m) {
      out << x[j] << ',' << v[m] << ',' << f(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) << '\n';
    }
  }
  if (!out) throw IoError("failed writing snapshot file " + path.string());
}

void write_snapshot_binary(const std::filesystem::path& path, const Eigen::MatrixXd& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open snapshot file " + path.string());
  const std::int64_t dims[2] = {f.rows(), f.cols()};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = f;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rm.size())));
  if (!out) throw IoError("failed writing snapshot file " + path.string());
}

Eigen::MatrixXd read_snapshot_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot file " + path.string());
  std::int64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || dims[0] < 0 || dims[1] < 0) throw IoError("bad snapshot header in " + path.string());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(dims[0], dims[1]);
  in.read(reinterpret_cast<char*>(rm.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rm.size())));
  if (!in) throw IoError("truncated snapshot file " + path.string());
  return rm;
}

}  // namespace vpfp
