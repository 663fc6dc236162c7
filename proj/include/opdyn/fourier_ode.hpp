#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "opdyn/core.hpp"
#include "opdyn/grid.hpp"

namespace opdyn {

/// A time step produced a non-finite state.
struct IntegrationError : std::runtime_error {
  double time;
  explicit IntegrationError(double t, const std::string& what_) : std::runtime_error(what_), time(t) {}
};

/// Cosine-transform factor of the attraction kernel at mode n.
inline double kernel_mode_factor(int n, double confidence_range) {
  if (n < 0) throw std::invalid_argument("kernel_mode_factor: mode must be >= 0");
  const double a = M_PI * n * confidence_range;
  return -std::cos(a) + sinc(a);
}

/// Truncated quadratic ODE system for the cosine coefficients of the density.
/// The mass mode is constant and folded into the forcing term.
struct OdeSystem {
  int max_mode = 0;
  ModelParams params;
  Eigen::VectorXd forcing;       // constant growth rates, one per mode
  Eigen::MatrixXd linear;        // linear coupling matrix
  std::vector<double> kernel_f;  // kernel mode factors 0..max_mode
  bool include_quadratic = true;
};

/// Assembles the mode ODEs for the given parameters and radical coefficients.
/// Radical coefficients must extend to twice the truncation order.
inline OdeSystem build_system(const ModelParams& p, const RadicalDensity& rd, int max_mode) {
  if (max_mode < 1) throw std::invalid_argument("build_system: need at least one mode");
  if (static_cast<int>(rd.coeffs.size()) < 2 * max_mode + 1)
    throw std::invalid_argument("build_system: radical coefficients must extend to twice the truncation");

  const double R = p.confidence_range;
  const double M = p.radical_mass;
  const double s2 = p.noise * p.noise;
  const auto& q = rd.coeffs;

  std::vector<double> f(static_cast<std::size_t>(2 * max_mode) + 1);
  for (int k = 0; k <= 2 * max_mode; ++k) f[static_cast<std::size_t>(k)] = kernel_mode_factor(k, R);

  OdeSystem sys{max_mode, p, Eigen::VectorXd(max_mode), Eigen::MatrixXd(max_mode, max_mode),
                std::vector<double>(f.begin(), f.begin() + max_mode + 1), true};

  for (int n = 1; n <= max_mode; ++n) {
    sys.forcing(n - 1) = 2.0 * M * R * f[static_cast<std::size_t>(n)] * q[static_cast<std::size_t>(n)];
    for (int k = 1; k <= max_mode; ++k) {
      if (k == n) {
        sys.linear(n - 1, n - 1) = 2.0 * R * f[static_cast<std::size_t>(n)] +
                                   0.5 * M * R * f[static_cast<std::size_t>(2 * n)] * q[static_cast<std::size_t>(2 * n)] -
                                   0.5 * M_PI * M_PI * s2 * n * n;
      } else {
        const int sum = n + k;
        const int diff = std::abs(n - k);
        // the kernel factor at |n-k| keeps the sign of 1/(n-k)
        sys.linear(n - 1, k - 1) =
            n * M * R *
            (q[static_cast<std::size_t>(sum)] * f[static_cast<std::size_t>(sum)] / sum +
             q[static_cast<std::size_t>(diff)] * f[static_cast<std::size_t>(diff)] / static_cast<double>(n - k));
      }
    }
  }
  return sys;
}

/// Time derivative of the mode vector. Quadratic couplings touch mode n only
/// through index pairs summing or differencing to n.
inline Eigen::VectorXd rhs(const OdeSystem& sys, const Eigen::VectorXd& modes) {
  Eigen::VectorXd out = sys.forcing + sys.linear * modes;
  if (sys.include_quadratic) {
    const int N = sys.max_mode;
    const double R = sys.params.confidence_range;
    const auto& f = sys.kernel_f;
    for (int n = 1; n <= N; ++n) {
      double acc = 0.0;
      for (int k = 1; k < n; ++k)
        acc += f[static_cast<std::size_t>(k)] / k * modes(k - 1) * modes(n - k - 1);
      for (int k = n + 1; k <= N; ++k)
        acc += (f[static_cast<std::size_t>(k)] / k - f[static_cast<std::size_t>(k - n)] / (k - n)) *
               modes(k - 1) * modes(k - n - 1);
      out(n - 1) += n * R * acc;
    }
  }
  return out;
}

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
};

/// Classical fixed-step fourth-order integration of the mode ODEs. States are
/// recorded every `sample_stride` steps (plus the initial and final states).
inline OdeTrajectory integrate(const OdeSystem& sys, const Eigen::VectorXd& initial, double t_end,
                               double dt, long sample_stride = 1) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (initial.size() != sys.max_mode) throw std::invalid_argument("integrate: state size mismatch");
  if (!initial.allFinite()) throw std::invalid_argument("integrate: initial state is not finite");
  if (sample_stride < 1) sample_stride = 1;

  const long steps = std::lround(t_end / dt);
  OdeTrajectory traj;
  traj.times.reserve(static_cast<std::size_t>(steps / sample_stride) + 2);
  traj.times.push_back(0.0);
  traj.states.push_back(initial);

  Eigen::VectorXd p = initial;
  for (long step = 1; step <= steps; ++step) {
    const Eigen::VectorXd k1 = rhs(sys, p);
    const Eigen::VectorXd k2 = rhs(sys, p + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = rhs(sys, p + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = rhs(sys, p + dt * k3);
    p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!p.allFinite())
      throw IntegrationError(step * dt, "integrate: state became non-finite at t = " + std::to_string(step * dt));
    if (step % sample_stride == 0 || step == steps) {
      traj.times.push_back(step * dt);
      traj.states.push_back(p);
    }
  }
  return traj;
}

/// Wraps an evolved mode vector as a full coefficient state with unit mass.
inline FourierState make_state(double t, const Eigen::VectorXd& modes) {
  FourierState s;
  s.time = t;
  s.coeffs.resize(static_cast<std::size_t>(modes.size()) + 1);
  s.coeffs[0] = 1.0;
  for (int i = 0; i < modes.size(); ++i) s.coeffs[static_cast<std::size_t>(i) + 1] = modes(i);
  return s;
}

}  // namespace opdyn
