#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "slp/error.hpp"

namespace slp {

inline std::vector<double> uniform_grid(double a, double b, std::size_t n) {
  if (n < 2 || !(a < b)) throw ContractViolation("uniform_grid: need a < b and n >= 2");
  std::vector<double> g(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + h * static_cast<double>(i);
  g.back() = b;
  return g;
}

/// Nodes x = scale * sinh(t) with t uniform: spacing ~ scale near the
/// origin and geometric far from it.
inline std::vector<double> sinh_grid(double a, double b, std::size_t n, double scale = 1.0) {
  if (n < 2 || !(a < b) || !(scale > 0.0)) throw ContractViolation("sinh_grid: bad arguments");
  const double ta = std::asinh(a / scale), tb = std::asinh(b / scale);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = scale * std::sinh(ta + (tb - ta) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = a;
  g.back() = b;
  return g;
}

/// Sorted union of a grid and extra points inside [grid.front(), grid.back()],
/// dropping points closer than a relative 1e-12 to an existing node.
inline std::vector<double> merge_points(std::vector<double> grid, const std::vector<double>& extra) {
  if (grid.empty()) return grid;
  const double lo = grid.front(), hi = grid.back();
  for (double x : extra)
    if (x > lo && x < hi) grid.push_back(x);
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    if (!out.empty() && std::fabs(x - out.back()) <= 1e-12 * std::max(1.0, std::fabs(x))) continue;
    out.push_back(x);
  }
  out.back() = hi;
  return out;
}

}  // namespace slp
