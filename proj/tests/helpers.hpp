#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "opdyn/grid.hpp"

namespace testutil {

/// Trapezoid quadrature of f over [0,1] with n panels.
template <class F>
double trapezoid01(F f, int n) {
  const double h = 1.0 / n;
  double acc = 0.5 * (f(0.0) + f(1.0));
  for (int i = 1; i < n; ++i) acc += f(i * h);
  return acc * h;
}

/// Random positive even unit-mass density on the grid.
inline opdyn::GridDensity random_density(int nodes_per_unit, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  const int n = nodes_per_unit;
  std::vector<double> half(static_cast<std::size_t>(n) + 1);
  for (auto& v : half) v = unit(engine);
  opdyn::GridDensity g;
  g.nodes_per_unit = n;
  g.values.assign(static_cast<std::size_t>(2 * n), 0.0);
  for (int i = 0; i < n; ++i) g.values[static_cast<std::size_t>(n + i)] = half[static_cast<std::size_t>(i)];
  for (int i = 1; i <= n; ++i) g.values[static_cast<std::size_t>(n - i)] = half[static_cast<std::size_t>(i)];
  const double total = opdyn::mass(g);
  for (auto& v : g.values) v /= total;
  return g;
}

/// Grid samples of a pointwise function of |x| on [0,1], extended evenly.
template <class F>
opdyn::GridDensity sampled_density(int nodes_per_unit, F density) {
  opdyn::GridDensity g;
  g.nodes_per_unit = nodes_per_unit;
  g.values.resize(static_cast<std::size_t>(2 * nodes_per_unit));
  for (int j = 0; j < g.size(); ++j) g.values[static_cast<std::size_t>(j)] = density(std::fabs(g.node(j)));
  return g;
}

}  // namespace testutil
