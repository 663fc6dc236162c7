#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "opdyn/core.hpp"
#include "opdyn/fourier_ode.hpp"
#include "opdyn/grid.hpp"

namespace opdyn {

/// Continuum order parameter: mass of pairs within the confidence range,
/// double trapezoid quadrature over [0,1]^2 with no periodic images.
inline double mass_order_parameter(const GridDensity& g, double confidence_range) {
  const int n = g.nodes_per_unit;
  const double h = g.spacing();
  const int window = static_cast<int>(std::lround(confidence_range * n));
  if (window < 1) throw std::invalid_argument("mass_order_parameter: grid too coarse for the confidence range");

  // samples on [0,1] including the wrapped x = 1 endpoint
  std::vector<double> u(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = g.values[static_cast<std::size_t>(n + i)];
  u[static_cast<std::size_t>(n)] = g.values[0];

  double outer = 0.0;
  for (int i = 0; i <= n; ++i) {
    const int lo = std::max(0, i - window);
    const int hi = std::min(n, i + window);
    double inner = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double w = (j == lo || j == hi) ? 0.5 : 1.0;
      inner += w * u[static_cast<std::size_t>(j)];
    }
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    outer += w * u[static_cast<std::size_t>(i)] * inner * h;
  }
  return outer * h;
}

/// Constant and linear terms of the mode ODEs at the uniform state.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> linearize_at_uniform(const ModelParams& p,
                                                                        const RadicalDensity& rd,
                                                                        int max_mode) {
  OdeSystem sys = build_system(p, rd, max_mode);
  return {std::move(sys.forcing), std::move(sys.linear)};
}

struct CriticalNoiseResult {
  double value = 0.0;
  bool found = false;
};

/// Smallest noise level at which the linearized system is stable and its
/// equilibrium stays within `gamma_threshold` of the uniform state: coarse
/// scan on the standard grid of 0.005, then bisection to `tol`.
inline CriticalNoiseResult critical_noise(double confidence_range, double radical_mass,
                                          const RadicalDensity& rd, int max_mode,
                                          double gamma_threshold, double tol = 1e-4) {
  if (!(gamma_threshold > 0.0)) throw std::invalid_argument("critical_noise: threshold must be positive");

  auto disordered = [&](double noise) {
    const ModelParams p(confidence_range, noise, radical_mass);
    OdeSystem sys = build_system(p, rd, max_mode);
    const Eigen::EigenSolver<Eigen::MatrixXd> eigen(sys.linear, /*computeEigenvectors=*/false);
    if (eigen.eigenvalues().real().maxCoeff() >= 0.0) return false;
    const Eigen::VectorXd equilibrium = sys.linear.partialPivLu().solve(-sys.forcing);
    return equilibrium.squaredNorm() < gamma_threshold;
  };

  const double coarse = 0.005;
  double lo = 0.0, hi = 0.0;
  for (double s = coarse; s <= 1.0 + 1e-12; s += coarse) {
    if (disordered(s)) {
      hi = s;
      lo = s - coarse;
      break;
    }
  }
  if (hi == 0.0) return {0.0, false};
  if (lo <= 0.0) lo = 1e-6;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (disordered(mid) ? hi : lo) = mid;
  }
  return {0.5 * (lo + hi), true};
}

/// Predicted structure of the first clusters formed from a uniform start.
struct ClusterReport {
  int dominant_mode = 0;     // most unstable cosine mode
  double growth_rate = 0.0;  // its exponential growth rate (positive)
  double forcing_rate = 0.0; // its constant growth rate
  int cluster_count = 0;     // predicted clusters on [0,1]
  double onset_time = 0.0;   // predicted onset of the clustered profile
  bool onset_defined = true; // false when the forcing rate vanishes exactly
};

/// Scans the per-mode growth rates; absent result means no unstable mode and
/// hence no clustering predicted. Ties in the scan resolve to the smaller
/// mode index.
inline std::optional<ClusterReport> initial_clusters(const ModelParams& p, const RadicalDensity& rd,
                                                     int max_mode) {
  const OdeSystem sys = build_system(p, rd, max_mode);
  int best = 0;
  double best_rate = 0.0;
  for (int n = 1; n <= max_mode; ++n) {
    const double rate = sys.linear(n - 1, n - 1);
    if (rate > best_rate) {
      best_rate = rate;
      best = n;
    }
  }
  if (best == 0) return std::nullopt;

  ClusterReport report;
  report.dominant_mode = best;
  report.growth_rate = best_rate;
  report.forcing_rate = sys.forcing(best - 1);
  report.cluster_count = report.forcing_rate > 0.0 ? best / 2 + 1 : (best + 1) / 2;
  if (report.forcing_rate == 0.0) {
    report.onset_defined = false;
    report.onset_time = std::numeric_limits<double>::quiet_NaN();
  } else {
    report.onset_time = std::log1p(best_rate / std::fabs(report.forcing_rate)) / best_rate;
  }
  return report;
}

}  // namespace opdyn
