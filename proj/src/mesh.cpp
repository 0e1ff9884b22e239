#include "vpfp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vpfp/error.hpp"
#include "vpfp/quadrature.hpp"

namespace vpfp {

SpatialMesh::SpatialMesh(std::vector<double> interfaces) : interfaces_(std::move(interfaces)) {
  if (interfaces_.size() < 4) {
    throw ConfigError("mesh needs at least 3 cells, got " +
                      std::to_string(interfaces_.empty() ? 0 : interfaces_.size() - 1));
  }
  const std::size_t n = interfaces_.size() - 1;
  centers_.resize(n);
  widths_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = interfaces_[j + 1] - interfaces_[j];
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ConfigError("mesh interfaces must be finite and strictly increasing (cell " +
                        std::to_string(j) + ")");
    }
    widths_[j] = w;
    centers_[j] = 0.5 * (interfaces_[j] + interfaces_[j + 1]);
  }
}

double SpatialMesh::dual_width(int j) const {
  const int n = n_cells();
  if (j == n - 1) return 0.5 * (widths_.back() + widths_.front());
  return 0.5 * (width(j) + width(j + 1));
}

double SpatialMesh::max_width() const noexcept {
  return *std::max_element(widths_.begin(), widths_.end());
}

bool SpatialMesh::is_uniform(double rel_tol) const noexcept {
  const double w0 = widths_.front();
  return std::all_of(widths_.begin(), widths_.end(),
                     [&](double w) { return std::abs(w - w0) <= rel_tol * w0; });
}

SpatialMesh uniform_mesh(double a, double b, int n_cells) {
  if (n_cells < 3) {
    throw ConfigError("uniform_mesh: n_cells must be >= 3 for the central stencil, got " +
                      std::to_string(n_cells));
  }
  if (!(a < b)) throw ConfigError("uniform_mesh: require a < b");
  std::vector<double> xi(static_cast<std::size_t>(n_cells) + 1);
  const double dx = (b - a) / n_cells;
  for (int j = 0; j <= n_cells; ++j) xi[static_cast<std::size_t>(j)] = a + j * dx;
  xi.back() = b;
  SpatialMesh mesh(std::move(xi));
  return mesh;
}

std::vector<double> cell_average(const std::function<double(double)>& g, const SpatialMesh& mesh,
                                 int quadrature_order) {
  if (quadrature_order < 1) throw ConfigError("cell_average: quadrature order must be >= 1");
  const QuadratureRule rule = gauss_legendre(quadrature_order);
  const auto xi = mesh.interfaces();
  std::vector<double> out(static_cast<std::size_t>(mesh.n_cells()));
  for (int j = 0; j < mesh.n_cells(); ++j) {
    const double lo = xi[static_cast<std::size_t>(j)];
    const double hi = xi[static_cast<std::size_t>(j) + 1];
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      acc += rule.weights[q] * g(mid + half * rule.nodes[q]);
    }
    out[static_cast<std::size_t>(j)] = 0.5 * acc;
  }
  return out;
}

double inner(const SpatialMesh& mesh, std::span<const double> u, std::span<const double> v) {
  const auto w = mesh.widths();
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * u[j] * v[j];
  return acc;
}

}  // namespace vpfp
