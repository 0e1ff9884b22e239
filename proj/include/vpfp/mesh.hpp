#pragma once

#include <functional>
#include <span>
#include <vector>

namespace vpfp {

/// Periodic partition of [a, b] into control volumes K_j = (x_{j-1/2}, x_{j+1/2}).
///
/// Cells are indexed 0..n_cells()-1 and wrap around: neighbor(n-1, +1) == 0.
/// Immutable after construction.
class SpatialMesh {
 public:
  /// Builds the mesh from the n+1 interface positions a = x_{1/2} < ... < x_{n+1/2} = b.
  explicit SpatialMesh(std::vector<double> interfaces);

  double a() const noexcept { return interfaces_.front(); }
  double b() const noexcept { return interfaces_.back(); }
  double length() const noexcept { return b() - a(); }
  int n_cells() const noexcept { return static_cast<int>(centers_.size()); }

  std::span<const double> centers() const noexcept { return centers_; }
  std::span<const double> widths() const noexcept { return widths_; }
  std::span<const double> interfaces() const noexcept { return interfaces_; }
  double center(int j) const { return centers_[static_cast<std::size_t>(j)]; }
  double width(int j) const { return widths_[static_cast<std::size_t>(j)]; }

  /// Distance between the centers of cells j and j+1 (periodic, wraps at the end).
  double dual_width(int j) const;

  /// h = max_j Δx_j.
  double max_width() const noexcept;

  bool is_uniform(double rel_tol = 1e-12) const noexcept;

  int neighbor(int j, int shift) const noexcept {
    const int n = n_cells();
    return ((j + shift) % n + n) % n;
  }

 private:
  std::vector<double> interfaces_;
  std::vector<double> centers_;
  std::vector<double> widths_;
};

/// Uniform periodic mesh with n_cells cells of width (b - a) / n_cells.
/// Requires a < b and n_cells >= 3 (the central stencil needs three distinct cells).
SpatialMesh uniform_mesh(double a, double b, int n_cells);

/// Per-cell averages (1/Δx_j) ∫_{K_j} g dx using a Gauss–Legendre rule of the given order.
std::vector<double> cell_average(const std::function<double(double)>& g, const SpatialMesh& mesh,
                                 int quadrature_order = 3);

/// l²(T) inner product Σ_j Δx_j u_j v_j.
double inner(const SpatialMesh& mesh, std::span<const double> u, std::span<const double> v);

}  // namespace vpfp
