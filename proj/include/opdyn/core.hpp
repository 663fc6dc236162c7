#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace opdyn {

inline constexpr const char* kVersion = "0.1.0";

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) { return std::fabs(x) < 1e-12 ? 1.0 : std::sin(x) / x; }

/// Macroscopic control knobs of the model.
struct ModelParams {
  double confidence_range;  // interaction radius in opinion space, in (0,1)
  double noise;             // diffusion strength, >= 0
  double radical_mass;      // mass of fixed opinions relative to the normal population

  ModelParams(double confidence_range_, double noise_, double radical_mass_)
      : confidence_range(confidence_range_), noise(noise_), radical_mass(radical_mass_) {
    if (!(confidence_range > 0.0 && confidence_range < 1.0))
      throw std::invalid_argument("ModelParams: confidence range must lie in (0,1)");
    if (!(noise >= 0.0)) throw std::invalid_argument("ModelParams: noise must be >= 0");
    if (!(radical_mass >= 0.0)) throw std::invalid_argument("ModelParams: radical mass must be >= 0");
  }
};

/// Attraction kernel: the pull exerted by an opinion at distance `diff`,
/// zero outside the confidence range. Odd in `diff`.
inline double kernel(double diff, double confidence_range) {
  return std::fabs(diff) <= confidence_range ? diff : 0.0;
}

/// Cosine coefficients of the unit-mass triangular bump centered at `mean`
/// with support half-width `half_width`. Entry 0 is the mass itself.
inline std::vector<double> triangular_cosine_coeffs(double mean, double half_width, int max_order) {
  if (max_order < 1) throw std::invalid_argument("triangular_cosine_coeffs: max_order must be >= 1");
  std::vector<double> q(static_cast<std::size_t>(max_order) + 1);
  q[0] = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    const double s = sinc(0.5 * M_PI * n * half_width);
    q[static_cast<std::size_t>(n)] = 2.0 * std::cos(M_PI * n * mean) * s * s;
  }
  return q;
}

/// Density of the fixed ("radical") opinions: a triangular bump plus its
/// cosine-series coefficients on the evenly extended domain.
struct RadicalDensity {
  double mean;                 // apex location in (0,1)
  double half_width;           // support is [mean - half_width, mean + half_width]
  std::vector<double> coeffs;  // cosine coefficients; coeffs[0] == 1

  static RadicalDensity triangular(double mean, double half_width, int max_order) {
    if (!(half_width > 0.0))
      throw std::invalid_argument("RadicalDensity: half width must be positive");
    if (!(mean - half_width >= 0.0 && mean + half_width <= 1.0))
      throw std::invalid_argument("RadicalDensity: support must stay inside [0,1]");
    return RadicalDensity{mean, half_width, triangular_cosine_coeffs(mean, half_width, max_order)};
  }

  /// Pointwise density on [0,1]; peak value is 1/half_width at the mean.
  double density(double x) const {
    const double d = std::fabs(x - mean);
    return d <= half_width ? (half_width - d) / (half_width * half_width) : 0.0;
  }
};

}  // namespace opdyn
