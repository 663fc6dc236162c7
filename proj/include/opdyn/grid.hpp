#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "opdyn/core.hpp"

namespace opdyn {

/// Density samples on a uniform grid over [-1,1). The physical domain is
/// [0,1]; values at negative x mirror the positive side, and the whole grid
/// wraps with period 2. Node j sits at x = -1 + j/nodes_per_unit.
struct GridDensity {
  int nodes_per_unit = 0;
  std::vector<double> values;

  static GridDensity uniform(int nodes_per_unit) {
    if (nodes_per_unit < 2) throw std::invalid_argument("GridDensity: need at least two nodes per unit");
    GridDensity g;
    g.nodes_per_unit = nodes_per_unit;
    g.values.assign(static_cast<std::size_t>(2 * nodes_per_unit), 1.0);
    return g;
  }

  int size() const { return 2 * nodes_per_unit; }
  double spacing() const { return 1.0 / nodes_per_unit; }
  double node(int j) const { return -1.0 + j * spacing(); }
  /// Index of the node mirrored across x = 0.
  int mirror(int j) const { return j == 0 ? 0 : size() - j; }
};

/// Trapezoid integral of the density over the physical domain [0,1].
/// The x = 1 endpoint wraps to node 0.
inline double mass(const GridDensity& g) {
  const int n = g.nodes_per_unit;
  double acc = 0.5 * (g.values[static_cast<std::size_t>(n)] + g.values[0]);
  for (int j = n + 1; j < 2 * n; ++j) acc += g.values[static_cast<std::size_t>(j)];
  return acc * g.spacing();
}

inline double max_asymmetry(const GridDensity& g) {
  double m = 0.0;
  for (int j = 1; j < g.nodes_per_unit; ++j)
    m = std::max(m, std::fabs(g.values[static_cast<std::size_t>(j)] -
                              g.values[static_cast<std::size_t>(g.mirror(j))]));
  return m;
}

inline void symmetrize(GridDensity& g) {
  for (int j = 1; j < g.nodes_per_unit; ++j) {
    const auto a = static_cast<std::size_t>(j);
    const auto b = static_cast<std::size_t>(g.mirror(j));
    const double v = 0.5 * (g.values[a] + g.values[b]);
    g.values[a] = g.values[b] = v;
  }
}

// Norms. "unit" integrates over [0,1] by trapezoid; "extended" integrates
// over the full period [-1,1], where the periodic trapezoid rule is a plain
// node sum.

inline double l1_unit(const GridDensity& g) {
  const int n = g.nodes_per_unit;
  double acc = 0.5 * (std::fabs(g.values[static_cast<std::size_t>(n)]) + std::fabs(g.values[0]));
  for (int j = n + 1; j < 2 * n; ++j) acc += std::fabs(g.values[static_cast<std::size_t>(j)]);
  return acc * g.spacing();
}

inline double l2_unit(const GridDensity& g) {
  const int n = g.nodes_per_unit;
  double acc = 0.5 * (g.values[static_cast<std::size_t>(n)] * g.values[static_cast<std::size_t>(n)] +
                      g.values[0] * g.values[0]);
  for (int j = n + 1; j < 2 * n; ++j) {
    const double v = g.values[static_cast<std::size_t>(j)];
    acc += v * v;
  }
  return std::sqrt(acc * g.spacing());
}

inline double l2_extended(const GridDensity& g) {
  double acc = 0.0;
  for (double v : g.values) acc += v * v;
  return std::sqrt(acc * g.spacing());
}

inline double l1_extended(const GridDensity& g) {
  double acc = 0.0;
  for (double v : g.values) acc += std::fabs(v);
  return acc * g.spacing();
}

inline GridDensity difference(const GridDensity& a, const GridDensity& b) {
  if (a.nodes_per_unit != b.nodes_per_unit)
    throw std::invalid_argument("difference: grid resolutions do not match");
  GridDensity d = a;
  for (std::size_t j = 0; j < d.values.size(); ++j) d.values[j] -= b.values[j];
  return d;
}

inline double l2_extended_distance(const GridDensity& a, const GridDensity& b) {
  return l2_extended(difference(a, b));
}

inline double linf_distance(const GridDensity& a, const GridDensity& b) {
  if (a.nodes_per_unit != b.nodes_per_unit)
    throw std::invalid_argument("linf_distance: grid resolutions do not match");
  double m = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j)
    m = std::max(m, std::fabs(a.values[j] - b.values[j]));
  return m;
}

inline double sup_value(const GridDensity& g) {
  return *std::max_element(g.values.begin(), g.values.end());
}

inline double min_value(const GridDensity& g) {
  return *std::min_element(g.values.begin(), g.values.end());
}

/// Truncated cosine series of an even density: coeffs[0] is the mass mode,
/// coeffs[n] multiplies cos(pi n x).
struct FourierState {
  double time = 0.0;
  std::vector<double> coeffs;

  int max_mode() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// Projects grid samples onto the cosine basis. Coefficients for n >= 1 are
/// the doubled half-domain integrals, so synthesis is a plain cosine sum.
/// Rejects input whose even symmetry is broken beyond `asymmetry_tol`.
inline FourierState cosine_analyze(const GridDensity& g, int max_mode, double asymmetry_tol = 1e-8) {
  if (max_mode < 0 || max_mode >= g.nodes_per_unit)
    throw std::invalid_argument("cosine_analyze: truncation must stay below the grid resolution");
  if (max_asymmetry(g) > asymmetry_tol)
    throw std::invalid_argument("cosine_analyze: input density is not even");
  const int n = g.nodes_per_unit;
  const double h = g.spacing();
  FourierState s;
  s.coeffs.assign(static_cast<std::size_t>(max_mode) + 1, 0.0);
  for (int m = 0; m <= max_mode; ++m) {
    // trapezoid of rho * cos(pi m x) over [0,1]; x = 1 wraps to node 0
    double acc = 0.5 * (g.values[static_cast<std::size_t>(n)] +
                        g.values[0] * std::cos(M_PI * m));
    for (int j = 1; j < n; ++j)
      acc += g.values[static_cast<std::size_t>(n + j)] * std::cos(M_PI * m * j * h);
    s.coeffs[static_cast<std::size_t>(m)] = (m == 0 ? 1.0 : 2.0) * acc * h;
  }
  return s;
}

inline GridDensity cosine_synthesize(const FourierState& s, int nodes_per_unit) {
  GridDensity g = GridDensity::uniform(nodes_per_unit);
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    double acc = 0.0;
    for (int m = 0; m <= s.max_mode(); ++m) acc += s.coeffs[static_cast<std::size_t>(m)] * std::cos(M_PI * m * x);
    g.values[static_cast<std::size_t>(j)] = acc;
  }
  return g;
}

/// Force field exerted on each grid node by the density plus the weighted
/// radical density, computed by direct quadrature of the kernel convolution
/// over the periodic extension. Window endpoints snap to grid nodes.
inline std::vector<double> interaction_force(const GridDensity& g, const RadicalDensity& rd,
                                             const ModelParams& p) {
  const int n = g.nodes_per_unit;
  const int total = 2 * n;
  const double h = g.spacing();
  const int window = static_cast<int>(std::lround(p.confidence_range * n));
  if (window < 8)
    throw std::invalid_argument("interaction_force: grid too coarse for the confidence range (R*N < 8)");

  std::vector<double> combined(static_cast<std::size_t>(total));
  for (int j = 0; j < total; ++j)
    combined[static_cast<std::size_t>(j)] =
        g.values[static_cast<std::size_t>(j)] + p.radical_mass * rd.density(std::fabs(g.node(j)));

  std::vector<double> force(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    double acc = 0.0;
    for (int k = -window; k <= window; ++k) {
      const double weight = (k == -window || k == window) ? 0.5 : 1.0;
      // displacement of the source node relative to node i is k*h, the kernel
      // value at that displacement is -k*h
      acc += weight * (-k * h) * combined[static_cast<std::size_t>((i + k + total) % total)];
    }
    force[static_cast<std::size_t>(i)] = acc * h;
  }
  return force;
}

}  // namespace opdyn
