#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "opdyn/fourier_ode.hpp"
#include "opdyn/stationary.hpp"

using Catch::Approx;
using namespace opdyn;

TEST_CASE("stationary map basics", "[stationary]") {
  const auto rd = RadicalDensity::triangular(0.7, 0.1, 1);

  SECTION("uniform density without radicals maps to itself") {
    const ModelParams p(0.1, 0.3, 0.0);
    const GridDensity out = apply_stationary_map(GridDensity::uniform(250), rd, p);
    for (double v : out.values) CHECK(v == Approx(1.0).margin(1e-13));
  }

  SECTION("zero noise is rejected") {
    REQUIRE_THROWS_AS(apply_stationary_map(GridDensity::uniform(250), rd, ModelParams(0.1, 0.0, 0.1)),
                      std::invalid_argument);
  }

  SECTION("output is a positive even unit-mass density with the sup bound") {
    const ModelParams p(0.1, 0.5, 0.1);
    const double sup_bound =
        std::exp(8.0 * p.confidence_range * (1.0 + p.radical_mass) / (p.noise * p.noise));
    std::mt19937_64 engine(71);
    for (int trial = 0; trial < 100; ++trial) {
      const GridDensity in = testutil::random_density(250, engine);
      const GridDensity out = apply_stationary_map(in, rd, p);
      CHECK(mass(out) == Approx(1.0).margin(1e-10));
      CHECK(max_asymmetry(out) == 0.0);
      CHECK(min_value(out) > 0.0);
      CHECK(sup_value(out) <= sup_bound);
    }
  }

  SECTION("small noise does not overflow") {
    const ModelParams p(0.1, 0.005, 0.1);
    const GridDensity out = apply_stationary_map(GridDensity::uniform(250), rd, p);
    CHECK(mass(out) == Approx(1.0).margin(1e-10));
    for (double v : out.values) CHECK(std::isfinite(v));
  }
}

TEST_CASE("empirical Lipschitz ratio stays under the constant", "[stationary]") {
  const auto rd = RadicalDensity::triangular(0.7, 0.1, 1);
  std::mt19937_64 engine(73);
  for (double noise : {0.5, 0.9, 1.3}) {
    const ModelParams p(0.1, noise, 0.1);
    const double constant = lipschitz_constant(p, 1.0);
    for (int trial = 0; trial < 34; ++trial) {
      const GridDensity a = testutil::random_density(250, engine);
      const GridDensity b = testutil::random_density(250, engine);
      const double num = l1_extended(difference(apply_stationary_map(a, rd, p), apply_stationary_map(b, rd, p)));
      const double den = l1_extended(difference(a, b));
      CHECK(num <= constant * den * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("picard iteration", "[stationary]") {
  const auto rd = RadicalDensity::triangular(0.7, 0.1, 1);

  SECTION("no radicals above the uniqueness threshold: the uniform state") {
    const ModelParams p(0.1, 1.25, 0.0);
    const auto report = picard_stationary(rd, p, 1e-12, 200, 250);
    CHECK(report.converged);
    for (double v : report.density.values) CHECK(v == Approx(1.0).margin(1e-8));
  }

  SECTION("low noise with radicals: unimodal profile at the radical mean") {
    const ModelParams p(0.1, 0.03, 0.1);
    const auto report = picard_stationary(rd, p, 1e-10, 2000, 250);
    CHECK(report.converged);
    const GridDensity& g = report.density;
    // single interior maximum at x = 0.7
    const int peak_node = 250 + 175;
    int maxima = 0;
    for (int i = 1; i < 250; ++i) {
      const double prev = g.values[static_cast<std::size_t>(250 + i - 1)];
      const double here = g.values[static_cast<std::size_t>(250 + i)];
      const double next = i + 1 < 250 ? g.values[static_cast<std::size_t>(250 + i + 1)] : g.values[0];
      if (here > prev && here > next) ++maxima;
    }
    CHECK(maxima == 1);
    CHECK(g.values[static_cast<std::size_t>(peak_node)] == sup_value(g));
  }

  SECTION("hitting the iteration cap returns the best iterate, flagged") {
    const ModelParams p(0.1, 0.03, 0.1);
    const auto report = picard_stationary(rd, p, 1e-14, 3, 250);
    CHECK(!report.converged);
    CHECK(report.iterations == 3);
    CHECK(report.residual > 0.0);
    CHECK(mass(report.density) == Approx(1.0).margin(1e-10));
  }

  SECTION("contraction: residuals shrink by at least the Lipschitz factor") {
    const ModelParams p(0.1, 1.25, 0.1);
    const double constant = lipschitz_constant(p, 1.0);
    REQUIRE(constant < 1.0);
    GridDensity rho = GridDensity::uniform(250);
    double prev = -1.0;
    for (int iter = 0; iter < 12; ++iter) {
      const GridDensity next = apply_stationary_map(rho, rd, p);
      const double residual = l1_extended(difference(next, rho));
      if (prev >= 0.0) CHECK(residual <= constant * prev * (1.0 + 1e-12) + 1e-15);
      prev = residual;
      rho = next;
    }
  }
}

TEST_CASE("lipschitz constant and uniqueness threshold", "[stationary]") {
  const ModelParams p(0.1, 0.7, 0.1);
  // p = 1 kills the sup-norm factor
  const double expected = 0.5 * (std::exp(16.0 * 0.1 / (0.7 * 0.7)) - 1.0);
  CHECK(lipschitz_constant(p, 1.0) == Approx(expected).margin(1e-14));
  CHECK(lipschitz_constant(p, 2.0) > lipschitz_constant(p, 1.0));
  REQUIRE_THROWS_AS(lipschitz_constant(p, 0.5), std::invalid_argument);

  CHECK(uniqueness_threshold(0.1) == Approx(1.4564).margin(1e-4));

  // at the threshold the L1 constant crosses one
  const double threshold_noise = std::sqrt(uniqueness_threshold(0.1));
  CHECK(lipschitz_constant(ModelParams(0.1, threshold_noise, 0.1), 1.0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("semi-gaussian approximation", "[stationary]") {
  const ModelParams p(0.1, 0.03, 0.1);
  const GridDensity g = approx_stationary(0.7, p, 250);

  SECTION("unit mass, peak at the mean") {
    CHECK(mass(g) == Approx(1.0).margin(1e-12));
    CHECK(g.values[250 + 175] == sup_value(g));
  }

  SECTION("closed-form ratio at one confidence range from the mean") {
    const double ratio = g.values[250 + 200] / g.values[250 + 175];  // x = 0.8 vs x = 0.7
    const double expected = std::exp(-(p.radical_mass + 1.0) * 0.1 * 0.1 / (p.noise * p.noise));
    CHECK(ratio == Approx(expected).margin(1e-12));
    // flat tails beyond the confidence range
    CHECK(g.values[250 + 220] == Approx(g.values[250 + 240]).margin(1e-15));
  }

  SECTION("means too close to the boundary are rejected") {
    REQUIRE_THROWS_AS(approx_stationary(0.05, p, 250), std::invalid_argument);
    REQUIRE_THROWS_AS(approx_stationary(0.95, p, 250), std::invalid_argument);
  }
}

TEST_CASE("noise bounds", "[stationary]") {
  SECTION("closed forms") {
    const NoiseBounds b = noise_bounds(ModelParams(0.1, 0.1, 0.1));
    CHECK(b.sigma_b_sq == Approx(0.27473).margin(1e-4));
    CHECK(b.c_b == Approx(4.0 * 0.01 * 0.1 / (M_PI * std::sqrt(3.0))).margin(1e-15));
  }

  SECTION("self-consistent convergence threshold") {
    const NoiseBounds b = noise_bounds(ModelParams(0.1, 0.1, 0.0));
    CHECK(b.sigma_s_sq == Approx(0.4293).margin(1e-3));
    // residual of the defining equation vanishes
    const double rhs = 4.0 * 0.1 * 3.0 / M_PI +
                       4.0 * 0.01 / (M_PI * std::sqrt(3.0)) * std::exp(0.8 / b.sigma_s_sq);
    CHECK(b.sigma_s_sq == Approx(rhs).margin(1e-9));
  }

  SECTION("no radicals removes the estimate coefficient") {
    CHECK(noise_bounds(ModelParams(0.1, 0.1, 0.0)).c_b == 0.0);
  }

  SECTION("estimate quality factor") {
    CHECK(!estimate_eta(ModelParams(0.1, 0.1, 0.1)).has_value());   // below the floor
    CHECK(!estimate_eta(ModelParams(0.1, 0.8, 0.0)).has_value());   // no radicals
    const auto eta = estimate_eta(ModelParams(0.1, 0.6, 0.1));
    REQUIRE(eta.has_value());
    const NoiseBounds b = noise_bounds(ModelParams(0.1, 0.6, 0.1));
    CHECK(*eta == Approx((0.36 - b.sigma_b_sq) / b.c_b).margin(1e-12));
  }
}

TEST_CASE("long-time endpoint above the convergence threshold is a fixed point", "[stationary][slow]") {
  // above the exponential-convergence threshold the trajectory settles fast;
  // its long-time state must be left invariant by the stationary map
  const NoiseBounds bounds = noise_bounds(ModelParams(0.1, 0.1, 0.1));
  const ModelParams p(0.1, 1.1 * bounds.sigma_s, 0.1);
  const auto rd = RadicalDensity::triangular(0.7, 0.1, 32);
  const auto sys = build_system(p, rd, 16);
  const auto traj = integrate(sys, Eigen::VectorXd::Zero(16), 1000.0, 4e-3, 1000000);
  const GridDensity endpoint = cosine_synthesize(make_state(1000.0, traj.states.back()), 250);
  const GridDensity mapped = apply_stationary_map(endpoint, rd, p);
  CHECK(l2_extended_distance(mapped, endpoint) < 1e-3);
}

TEST_CASE("closeness-to-uniform estimate holds at the implied noise", "[stationary]") {
  const auto rd = RadicalDensity::triangular(0.7, 0.1, 1);
  const NoiseBounds b = noise_bounds(ModelParams(0.1, 0.1, 0.1));
  const double eta = 5.0;
  const double noise = std::sqrt(b.sigma_b_sq + eta * b.c_b);
  const ModelParams p(0.1, noise, 0.1);
  const auto report = picard_stationary(rd, p, 1e-11, 500, 250);
  REQUIRE(report.converged);

  GridDensity deviation = report.density;
  for (double& v : deviation.values) v -= 1.0;
  const GridDensity rgrid = testutil::sampled_density(250, [&](double x) { return rd.density(x); });
  CHECK(l2_extended(deviation) <= l2_extended(rgrid) / eta);
}
