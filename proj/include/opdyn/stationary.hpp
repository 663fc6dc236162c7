#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "opdyn/core.hpp"
#include "opdyn/grid.hpp"

namespace opdyn {

/// Stationary map: exponentiate minus the integrated force field and
/// normalize to unit mass on [0,1]. Output is strictly positive and even.
inline GridDensity apply_stationary_map(const GridDensity& g, const RadicalDensity& rd,
                                        const ModelParams& p) {
  if (!(p.noise > 0.0)) throw std::invalid_argument("apply_stationary_map: noise must be positive");
  const std::vector<double> force = interaction_force(g, rd, p);
  const int n = g.nodes_per_unit;
  const double h = g.spacing();

  // cumulative trapezoid of the force from x = 0 over [0,1]; x = 1 wraps to node 0
  std::vector<double> exponent(static_cast<std::size_t>(n) + 1, 0.0);
  const double scale = -2.0 / (p.noise * p.noise);
  double cum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f0 = force[static_cast<std::size_t>(n + i)];
    const double f1 = i + 1 < n ? force[static_cast<std::size_t>(n + i + 1)] : force[0];
    cum += 0.5 * h * (f0 + f1);
    exponent[static_cast<std::size_t>(i) + 1] = scale * cum;
  }

  // shift by the max exponent so small noise cannot overflow
  double peak = exponent[0];
  for (double e : exponent) peak = std::max(peak, e);
  std::vector<double> unnorm(exponent.size());
  for (std::size_t i = 0; i < exponent.size(); ++i) unnorm[i] = std::exp(exponent[i] - peak);

  double norm = 0.5 * (unnorm.front() + unnorm.back());
  for (std::size_t i = 1; i + 1 < unnorm.size(); ++i) norm += unnorm[i];
  norm *= h;

  GridDensity out;
  out.nodes_per_unit = n;
  out.values.assign(static_cast<std::size_t>(2 * n), 0.0);
  for (int i = 0; i < n; ++i) out.values[static_cast<std::size_t>(n + i)] = unnorm[static_cast<std::size_t>(i)] / norm;
  for (int i = 1; i <= n; ++i)
    out.values[static_cast<std::size_t>(n - i)] = unnorm[static_cast<std::size_t>(i)] / norm;
  return out;
}

struct PicardReport {
  GridDensity density;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool damped = false;
};

/// Fixed-point iteration of the stationary map from the uniform density.
/// Switches to 0.5 mixing if the residual oscillates; the report says so.
inline PicardReport picard_stationary(const RadicalDensity& rd, const ModelParams& p,
                                      double tol = 1e-10, int max_iter = 500,
                                      int nodes_per_unit = 256) {
  PicardReport report;
  GridDensity rho = GridDensity::uniform(nodes_per_unit);
  GridDensity best = rho;
  double best_residual = std::numeric_limits<double>::infinity();
  double prev_residual = std::numeric_limits<double>::infinity();
  int oscillations = 0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    const GridDensity next = apply_stationary_map(rho, rd, p);
    const double residual = l2_extended_distance(next, rho);
    if (residual > prev_residual) {
      if (++oscillations >= 2) report.damped = true;
    } else {
      oscillations = 0;
    }
    if (report.damped) {
      for (std::size_t j = 0; j < rho.values.size(); ++j)
        rho.values[j] = 0.5 * (rho.values[j] + next.values[j]);
    } else {
      rho = next;
    }
    report.iterations = iter;
    report.residual = residual;
    prev_residual = residual;
    if (residual < best_residual) {
      best_residual = residual;
      best = rho;
    }
    if (residual < tol) {
      report.converged = true;
      break;
    }
  }
  report.density = report.converged ? rho : best;
  report.residual = report.converged ? report.residual : best_residual;
  return report;
}

/// Lipschitz constant of the stationary map on L^p.
inline double lipschitz_constant(const ModelParams& p, double p_norm) {
  if (!(p_norm >= 1.0)) throw std::invalid_argument("lipschitz_constant: p_norm must be >= 1");
  if (!(p.noise > 0.0)) throw std::invalid_argument("lipschitz_constant: noise must be positive");
  const double s2 = p.noise * p.noise;
  const double first =
      std::exp(8.0 * p.confidence_range * (1.0 + p.radical_mass) / s2 * (1.0 - 1.0 / p_norm));
  return 0.5 * first * (std::exp(16.0 * p.confidence_range / s2) - 1.0);
}

/// Squared-noise level above which the stationary state is unique.
inline double uniqueness_threshold(double confidence_range) {
  return 16.0 * confidence_range / std::log(3.0);
}

/// Closed-form semi-Gaussian stationary profile for radicals concentrated at
/// `mean`. Valid away from the boundary, where mirrored images would
/// interfere with the cluster.
inline GridDensity approx_stationary(double mean, const ModelParams& p, int nodes_per_unit = 256) {
  if (!(p.noise > 0.0)) throw std::invalid_argument("approx_stationary: noise must be positive");
  const double R = p.confidence_range;
  if (!(mean > R && mean < 1.0 - R))
    throw std::invalid_argument(
        "approx_stationary: the cluster mean must stay at least one confidence range away from the "
        "boundary, where mirror images distort the profile");

  const int n = nodes_per_unit;
  const double h = 1.0 / n;
  const double rate = (p.radical_mass + 1.0) / (p.noise * p.noise);
  std::vector<double> unnorm(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double d = x - mean;
    unnorm[static_cast<std::size_t>(i)] = std::exp(-rate * std::min(d * d, R * R));
  }
  double norm = 0.5 * (unnorm.front() + unnorm.back());
  for (std::size_t i = 1; i + 1 < unnorm.size(); ++i) norm += unnorm[i];
  norm *= h;

  GridDensity out;
  out.nodes_per_unit = n;
  out.values.assign(static_cast<std::size_t>(2 * n), 0.0);
  for (int i = 0; i < n; ++i) out.values[static_cast<std::size_t>(n + i)] = unnorm[static_cast<std::size_t>(i)] / norm;
  for (int i = 1; i <= n; ++i)
    out.values[static_cast<std::size_t>(n - i)] = unnorm[static_cast<std::size_t>(i)] / norm;
  return out;
}

struct NoiseBounds {
  double sigma_b_sq = 0.0;  // noise floor of the closeness-to-uniform estimate
  double c_b = 0.0;         // radical-mass coefficient of that estimate
  double sigma_s_sq = 0.0;  // noise floor for exponential convergence
  double sigma_s = 0.0;
};

/// Closed-form threshold constants plus the self-consistent convergence
/// threshold, solved by bisection on its monotone residual.
inline NoiseBounds noise_bounds(const ModelParams& p, double tol = 1e-10) {
  const double R = p.confidence_range;
  const double M = p.radical_mass;
  NoiseBounds b;
  b.sigma_b_sq = 4.0 * R / M_PI * (M + R / std::sqrt(3.0) + 2.0);
  b.c_b = 4.0 * R * R * M / (M_PI * std::sqrt(3.0));

  const double linear_part = 4.0 * R * (3.0 + M) / M_PI;
  auto residual = [&](double s) {
    return s - linear_part - 4.0 * R * R / (M_PI * std::sqrt(3.0)) * std::exp(8.0 * R * (1.0 + M) / s);
  };
  double lo = linear_part;  // residual is negative here
  double hi = std::max(1.0, 2.0 * linear_part);
  while (residual(hi) < 0.0) hi *= 2.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  b.sigma_s_sq = 0.5 * (lo + hi);
  b.sigma_s = std::sqrt(b.sigma_s_sq);
  return b;
}

/// Quality factor of the closeness-to-uniform estimate at the configured
/// noise level; absent whenever the estimate does not apply (noise at or
/// below the floor, or no radicals).
inline std::optional<double> estimate_eta(const ModelParams& p) {
  const NoiseBounds b = noise_bounds(p);
  const double s2 = p.noise * p.noise;
  if (s2 <= b.sigma_b_sq || b.c_b <= 0.0) return std::nullopt;
  return (s2 - b.sigma_b_sq) / b.c_b;
}

}  // namespace opdyn
