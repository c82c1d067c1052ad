#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mbt/errors.hpp"
#include "mbt/piecewise.hpp"

namespace mbt {

enum class BoundaryPolicy { DirichletFrozen, Outflow };

/// Uniform finite-volume mesh of cell averages. Cell m covers
/// [x0 + m dx, x0 + (m+1) dx); a point exactly on an interface belongs to
/// the cell on its right.
struct DensityGrid {
  double dx{0.0};
  double x0{0.0};
  std::vector<double> cells;
  BoundaryPolicy boundary{BoundaryPolicy::DirichletFrozen};
  double ghost_left{0.0};
  double ghost_right{0.0};

  std::size_t size() const { return cells.size(); }
  double left_edge(std::size_t m) const { return x0 + static_cast<double>(m) * dx; }
  double right_edge(std::size_t m) const { return x0 + static_cast<double>(m + 1) * dx; }
  double center(std::size_t m) const { return x0 + (static_cast<double>(m) + 0.5) * dx; }
  /// Interface i sits between cells i-1 and i, i = 0..size().
  double interface(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double x_hi() const { return x0 + static_cast<double>(cells.size()) * dx; }

  bool contains(double x) const { return x >= x0 && x < x_hi(); }
  std::ptrdiff_t cell_index(double x) const { return static_cast<std::ptrdiff_t>(std::floor((x - x0) / dx)); }

  double ghost_value_left() const { return boundary == BoundaryPolicy::DirichletFrozen ? ghost_left : cells.front(); }
  double ghost_value_right() const { return boundary == BoundaryPolicy::DirichletFrozen ? ghost_right : cells.back(); }

  double mass() const {
    NeumaierSum s;
    for (double c : cells) s.add(c);
    return s.value() * dx;
  }

  void validate() const {
    if (!(dx > 0.0)) throw ConfigError("grid: dx must be positive");
    if (cells.empty()) throw ConfigError("grid: no cells");
    for (double c : cells)
      if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("grid: cell density outside [0,1]");
  }

  /// Project a datum onto cell averages (exact for piecewise-constant data)
  /// and freeze the boundary values as ghost states.
  static DensityGrid project(const PiecewiseConstant& datum, double x_lo, double x_hi, double dx,
                             BoundaryPolicy bc = BoundaryPolicy::DirichletFrozen) {
    if (!(x_hi > x_lo)) throw ConfigError("grid: empty domain");
    if (!(dx > 0.0)) throw ConfigError("grid: dx must be positive");
    auto n = static_cast<std::size_t>(std::llround((x_hi - x_lo) / dx));
    if (n == 0) throw ConfigError("grid: domain shorter than one cell");
    DensityGrid g;
    g.dx = dx;
    g.x0 = x_lo;
    g.boundary = bc;
    g.cells.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      double lo = g.left_edge(m), hi = g.right_edge(m);
      g.cells[m] = datum.integrate(lo, hi) / (hi - lo);
    }
    g.ghost_left = g.cells.front();
    g.ghost_right = g.cells.back();
    return g;
  }
};

/// L1 distance between two cell-average vectors on the same mesh.
inline double l1_cell_distance(const std::vector<double>& a, const std::vector<double>& b, double dx) {
  if (a.size() != b.size()) throw ConfigError("l1_cell_distance: size mismatch");
  NeumaierSum s;
  for (std::size_t m = 0; m < a.size(); ++m) s.add(std::abs(a[m] - b[m]));
  return s.value() * dx;
}

}  // namespace mbt
