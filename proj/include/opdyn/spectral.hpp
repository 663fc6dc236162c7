#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "opdyn/core.hpp"
#include "opdyn/fourier_ode.hpp"
#include "opdyn/grid.hpp"

namespace opdyn {

namespace detail {
// FFTW plan creation is not thread-safe; execution on distinct plans is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real <-> half-complex transform pair of a fixed size. Forward output is
/// normalized so that mode 0 is the grid mean.
class RealDft {
 public:
  explicit RealDft(int size) : n_(size) {
    if (size < 4 || size % 2 != 0) throw std::invalid_argument("RealDft: size must be even and >= 4");
    real_ = fftw_alloc_real(static_cast<std::size_t>(n_));
    cplx_ = fftw_alloc_complex(static_cast<std::size_t>(n_ / 2 + 1));
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(n_, real_, cplx_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(n_, cplx_, real_, FFTW_ESTIMATE);
  }
  ~RealDft() {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }
  RealDft(const RealDft&) = delete;
  RealDft& operator=(const RealDft&) = delete;

  int size() const { return n_; }
  int mode_count() const { return n_ / 2 + 1; }

  void forward(const std::vector<double>& grid, std::vector<std::complex<double>>& modes) {
    for (int j = 0; j < n_; ++j) real_[j] = grid[static_cast<std::size_t>(j)];
    fftw_execute(fwd_);
    modes.resize(static_cast<std::size_t>(mode_count()));
    const double scale = 1.0 / n_;
    for (int k = 0; k < mode_count(); ++k)
      modes[static_cast<std::size_t>(k)] = std::complex<double>(cplx_[k][0], cplx_[k][1]) * scale;
  }

  void backward(const std::vector<std::complex<double>>& modes, std::vector<double>& grid) {
    for (int k = 0; k < mode_count(); ++k) {
      cplx_[k][0] = modes[static_cast<std::size_t>(k)].real();
      cplx_[k][1] = modes[static_cast<std::size_t>(k)].imag();
    }
    fftw_execute(bwd_);
    grid.resize(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) grid[static_cast<std::size_t>(j)] = real_[j];
  }

 private:
  int n_;
  double* real_;
  fftw_complex* cplx_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

/// One semi-implicit mode update: advection enters explicitly through the
/// transformed product, diffusion is treated implicitly.
inline std::complex<double> implicit_mode_update(std::complex<double> mode,
                                                 std::complex<double> product_mode, int k,
                                                 double noise, double dt) {
  const std::complex<double> advect =
      std::complex<double>(0.0, M_PI * k) * product_mode;
  return (mode + dt * advect) / (1.0 + 0.5 * dt * M_PI * M_PI * noise * noise * k * k);
}

/// Semi-implicit pseudo-spectral solver on a grid of 2*max_mode nodes over
/// [-1,1). Evenness is re-imposed on the physical grid before every step and
/// the mass mode is held exactly constant.
class SpectralSolver {
 public:
  SpectralSolver(const ModelParams& p, const RadicalDensity& rd, int max_mode)
      : SpectralSolver(p, sample_radical_grid(rd, max_mode), max_mode) {}

  /// Radical input supplied as grid samples (e.g. a band-limited synthesis)
  /// instead of the pointwise triangular density.
  SpectralSolver(const ModelParams& p, const GridDensity& radical_grid, int max_mode)
      : params_(p), max_mode_(max_mode), dft_(2 * max_mode), time_(0.0), min_seen_(0.0), steps_(0) {
    if (radical_grid.nodes_per_unit != max_mode)
      throw std::invalid_argument("SpectralSolver: radical grid resolution must equal the truncation");
    kernel_f_.resize(static_cast<std::size_t>(max_mode_) + 1);
    for (int k = 0; k <= max_mode_; ++k)
      kernel_f_[static_cast<std::size_t>(k)] = kernel_mode_factor(k, p.confidence_range);

    std::vector<double> rgrid = radical_grid.values;
    dft_.forward(rgrid, radical_modes_);

    grid_.assign(static_cast<std::size_t>(2 * max_mode_), 1.0);
    min_seen_ = 1.0;
  }

  /// Grid samples of the radical density, extended evenly.
  static GridDensity sample_radical_grid(const RadicalDensity& rd, int max_mode) {
    GridDensity g;
    g.nodes_per_unit = max_mode;
    g.values.resize(static_cast<std::size_t>(2 * max_mode));
    for (int j = 0; j < 2 * max_mode; ++j)
      g.values[static_cast<std::size_t>(j)] = rd.density(std::fabs(g.node(j)));
    return g;
  }

  void set_state(const GridDensity& g) {
    if (g.nodes_per_unit != max_mode_)
      throw std::invalid_argument("SpectralSolver: grid resolution must equal the mode truncation");
    grid_ = g.values;
    min_seen_ = min_value(g);
  }

  GridDensity state() const {
    GridDensity g;
    g.nodes_per_unit = max_mode_;
    g.values = grid_;
    return g;
  }

  double time() const { return time_; }
  long steps_taken() const { return steps_; }
  /// Most negative grid value seen so far; spectral ringing can push samples
  /// transiently below zero and is reported rather than clipped.
  double min_density_seen() const { return min_seen_; }

  void step(double dt) {
    const int n = max_mode_;
    const int total = 2 * n;
    const double M = params_.radical_mass;
    const double R = params_.confidence_range;

    // mirror the upper half onto [-1,0)
    for (int j = 1; j < n; ++j) grid_[static_cast<std::size_t>(j)] = grid_[static_cast<std::size_t>(total - j)];

    dft_.forward(grid_, modes_);

    // force-field modes; mode 0 vanishes and the unpaired top mode is dropped
    force_modes_.assign(modes_.size(), std::complex<double>(0.0, 0.0));
    for (int k = 1; k < n; ++k) {
      const std::complex<double> src = modes_[static_cast<std::size_t>(k)] + M * radical_modes_[static_cast<std::size_t>(k)];
      force_modes_[static_cast<std::size_t>(k)] =
          std::complex<double>(0.0, -2.0 * R / (M_PI * k)) * kernel_f_[static_cast<std::size_t>(k)] * src;
    }
    dft_.backward(force_modes_, force_grid_);

    product_grid_.resize(grid_.size());
    for (std::size_t j = 0; j < grid_.size(); ++j) product_grid_[j] = grid_[j] * force_grid_[j];
    dft_.forward(product_grid_, product_modes_);

    for (int k = 1; k <= n; ++k)
      modes_[static_cast<std::size_t>(k)] = implicit_mode_update(
          modes_[static_cast<std::size_t>(k)], product_modes_[static_cast<std::size_t>(k)], k, params_.noise, dt);
    // the top mode has no conjugate partner; keep it real for the inverse
    modes_[static_cast<std::size_t>(n)].imag(0.0);
    dft_.backward(modes_, grid_);

    ++steps_;
    time_ += dt;
    for (double v : grid_) {
      if (!std::isfinite(v))
        throw IntegrationError(time_, "SpectralSolver: state became non-finite at step " +
                                          std::to_string(steps_) + " (t = " + std::to_string(time_) + ")");
      min_seen_ = std::min(min_seen_, v);
    }
  }

 private:
  ModelParams params_;
  int max_mode_;
  RealDft dft_;
  double time_;
  double min_seen_;
  long steps_;
  std::vector<double> kernel_f_;
  std::vector<std::complex<double>> radical_modes_;
  std::vector<double> grid_;
  std::vector<std::complex<double>> modes_;
  std::vector<std::complex<double>> force_modes_;
  std::vector<double> force_grid_;
  std::vector<double> product_grid_;
  std::vector<std::complex<double>> product_modes_;
};

struct SpectralTrajectory {
  std::vector<double> times;
  std::vector<GridDensity> profiles;
  double min_density = 0.0;
};

/// Runs the pseudo-spectral scheme from an initial density. If the initial
/// grid does not match the truncation it is projected through the cosine
/// basis first. Profiles are recorded every `sample_stride` steps.
inline SpectralTrajectory spectral_run(const GridDensity& initial, const RadicalDensity& rd,
                                       const ModelParams& p, double t_end, double dt, int max_mode,
                                       long sample_stride = 1) {
  if (!(dt > 0.0)) throw std::invalid_argument("spectral_run: dt must be positive");
  if (sample_stride < 1) sample_stride = 1;

  SpectralSolver solver(p, rd, max_mode);
  if (initial.nodes_per_unit == max_mode) {
    solver.set_state(initial);
  } else {
    const int analyzable = std::min(max_mode - 1, initial.nodes_per_unit - 1);
    solver.set_state(cosine_synthesize(cosine_analyze(initial, analyzable), max_mode));
  }

  const long steps = std::lround(t_end / dt);
  SpectralTrajectory traj;
  traj.times.push_back(0.0);
  traj.profiles.push_back(solver.state());
  for (long step = 1; step <= steps; ++step) {
    solver.step(dt);
    if (step % sample_stride == 0 || step == steps) {
      traj.times.push_back(solver.time());
      traj.profiles.push_back(solver.state());
    }
  }
  traj.min_density = solver.min_density_seen();
  return traj;
}

}  // namespace opdyn
