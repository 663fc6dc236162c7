#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "opdyn/core.hpp"
#include "opdyn/grid.hpp"

using Catch::Approx;
using namespace opdyn;

TEST_CASE("model params reject out-of-range values", "[core]") {
  REQUIRE_NOTHROW(ModelParams(0.1, 0.03, 0.1));
  REQUIRE_NOTHROW(ModelParams(0.1, 0.0, 0.0));
  REQUIRE_THROWS_AS(ModelParams(0.0, 0.1, 0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(ModelParams(1.0, 0.1, 0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(ModelParams(0.1, -0.1, 0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(ModelParams(0.1, 0.1, -1.0), std::invalid_argument);
}

TEST_CASE("attraction kernel", "[core]") {
  CHECK(kernel(0.0, 0.1) == 0.0);
  CHECK(kernel(0.05, 0.1) == 0.05);
  CHECK(kernel(0.2, 0.1) == 0.0);

  std::mt19937_64 engine(7);
  std::uniform_real_distribution<double> xi(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double x = xi(engine);
    CHECK(kernel(-x, 0.1) == -kernel(x, 0.1));
  }
}

TEST_CASE("triangular radical density", "[core]") {
  const auto rd = RadicalDensity::triangular(0.7, 0.1, 8);
  CHECK(rd.density(0.7) == Approx(10.0));
  CHECK(rd.density(0.85) == 0.0);
  CHECK(rd.density(0.65) == Approx(5.0));

  REQUIRE_THROWS_AS(RadicalDensity::triangular(0.7, 0.0, 8), std::invalid_argument);
  REQUIRE_THROWS_AS(RadicalDensity::triangular(0.95, 0.1, 8), std::invalid_argument);
  REQUIRE_THROWS_AS(RadicalDensity::triangular(0.05, 0.1, 8), std::invalid_argument);
}

TEST_CASE("radical cosine coefficients match quadrature", "[core]") {
  const double mean = 0.7, half_width = 0.1;
  const auto rd = RadicalDensity::triangular(mean, half_width, 16);

  CHECK(rd.coeffs[0] == 1.0);
  CHECK(rd.coeffs[1] == Approx(-1.16593).margin(1e-4));
  CHECK(rd.coeffs[8] == Approx(0.35398).margin(1e-4));

  // independent quadrature of the projection integrals; the support endpoints
  // 0.6 and 0.8 sit on quadrature nodes
  for (int n = 1; n <= 16; ++n) {
    const double oracle = 2.0 * testutil::trapezoid01(
                              [&](double x) { return rd.density(x) * std::cos(M_PI * n * x); }, 20000);
    CHECK(rd.coeffs[static_cast<std::size_t>(n)] == Approx(oracle).margin(1e-6));
  }
}

TEST_CASE("radical coefficients satisfy the energy identity", "[core]") {
  const double half_width = 0.1;
  const auto rd = RadicalDensity::triangular(0.7, half_width, 256);
  double series = rd.coeffs[0] * rd.coeffs[0];
  for (int n = 1; n <= 256; ++n) series += 0.5 * rd.coeffs[static_cast<std::size_t>(n)] * rd.coeffs[static_cast<std::size_t>(n)];
  const double direct = testutil::trapezoid01(
      [&](double x) { const double v = rd.density(x); return v * v; }, 20000);
  CHECK(series == Approx(direct).epsilon(0.01));
  CHECK(direct == Approx(2.0 / (3.0 * half_width)).epsilon(1e-6));
}

TEST_CASE("cosine transforms", "[core]") {
  SECTION("constant density has only the mass mode") {
    const auto s = cosine_analyze(GridDensity::uniform(64), 16);
    CHECK(s.coeffs[0] == Approx(1.0).margin(1e-14));
    for (int n = 1; n <= 16; ++n) CHECK(s.coeffs[static_cast<std::size_t>(n)] == Approx(0.0).margin(1e-13));
  }

  SECTION("single harmonic is recovered") {
    GridDensity g = GridDensity::uniform(64);
    for (int j = 0; j < g.size(); ++j) g.values[static_cast<std::size_t>(j)] = 1.0 + 0.5 * std::cos(3.0 * M_PI * g.node(j));
    const auto s = cosine_analyze(g, 16);
    CHECK(s.coeffs[3] == Approx(0.5).margin(1e-12));
    CHECK(s.coeffs[0] == Approx(1.0).margin(1e-14));
    for (int n : {1, 2, 4, 5, 10}) CHECK(s.coeffs[static_cast<std::size_t>(n)] == Approx(0.0).margin(1e-12));
  }

  SECTION("round trip is the identity on band-limited states") {
    std::mt19937_64 engine(11);
    std::uniform_real_distribution<double> amp(-0.3, 0.3);
    FourierState s;
    s.coeffs.assign(13, 0.0);
    s.coeffs[0] = 1.0;
    for (int n = 1; n <= 12; ++n) s.coeffs[static_cast<std::size_t>(n)] = amp(engine);
    const auto back = cosine_analyze(cosine_synthesize(s, 64), 12);
    for (int n = 0; n <= 12; ++n)
      CHECK(back.coeffs[static_cast<std::size_t>(n)] == Approx(s.coeffs[static_cast<std::size_t>(n)]).margin(1e-10));
  }

  SECTION("energy is preserved on band-limited inputs") {
    std::mt19937_64 engine(13);
    std::uniform_real_distribution<double> amp(-0.2, 0.2);
    FourierState s;
    s.coeffs.assign(9, 0.0);
    s.coeffs[0] = 1.0;
    for (int n = 1; n <= 8; ++n) s.coeffs[static_cast<std::size_t>(n)] = amp(engine);
    double coeff_energy = 2.0 * s.coeffs[0] * s.coeffs[0];
    for (int n = 1; n <= 8; ++n) coeff_energy += s.coeffs[static_cast<std::size_t>(n)] * s.coeffs[static_cast<std::size_t>(n)];
    const GridDensity g = cosine_synthesize(s, 128);
    const double grid_energy = l2_extended(g) * l2_extended(g);
    CHECK(grid_energy == Approx(coeff_energy).margin(1e-10));
  }

  SECTION("sampled triangular reproduces the closed-form coefficients") {
    const auto rd = RadicalDensity::triangular(0.7, 0.1, 16);
    const auto g = testutil::sampled_density(512, [&](double x) { return rd.density(x); });
    const auto s = cosine_analyze(g, 16);
    for (int n = 1; n <= 16; ++n)
      CHECK(s.coeffs[static_cast<std::size_t>(n)] == Approx(rd.coeffs[static_cast<std::size_t>(n)]).margin(1e-3));
  }

  SECTION("asymmetric input is rejected") {
    GridDensity g = GridDensity::uniform(64);
    g.values[10] += 0.1;
    REQUIRE_THROWS_AS(cosine_analyze(g, 8), std::invalid_argument);
  }

  SECTION("truncation must stay below grid resolution") {
    REQUIRE_THROWS_AS(cosine_analyze(GridDensity::uniform(16), 16), std::invalid_argument);
  }
}

TEST_CASE("interaction force by quadrature", "[core]") {
  const auto rd = RadicalDensity::triangular(0.7, 0.1, 8);

  SECTION("uniform density without radicals exerts no force") {
    const ModelParams p(0.1, 0.03, 0.0);
    const auto force = interaction_force(GridDensity::uniform(250), rd, p);
    for (double f : force) CHECK(std::fabs(f) < 1e-14);
  }

  SECTION("force vanishes at the radical mean by symmetry") {
    const ModelParams p(0.1, 0.03, 0.1);
    GridDensity g = GridDensity::uniform(250);
    const auto force = interaction_force(g, rd, p);
    const int node_at_mean = 250 + 175;  // x = 0.7
    CHECK(std::fabs(force[static_cast<std::size_t>(node_at_mean)]) < 1e-13);
  }

  SECTION("sup-norm bound for the uniform density") {
    const ModelParams p(0.1, 0.03, 0.1);
    const GridDensity g = GridDensity::uniform(250);
    const auto force = interaction_force(g, rd, p);
    double sup = 0.0;
    for (double f : force) sup = std::max(sup, std::fabs(f));
    CHECK(sup <= p.confidence_range * (l1_extended(g) + 2.0 * p.radical_mass) + 1e-12);
  }

  SECTION("sup-norm bound holds for randomized even densities") {
    const ModelParams p(0.1, 0.03, 0.1);
    std::mt19937_64 engine(17);
    for (int trial = 0; trial < 100; ++trial) {
      const GridDensity g = testutil::random_density(250, engine);
      const auto force = interaction_force(g, rd, p);
      double sup = 0.0;
      for (double f : force) sup = std::max(sup, std::fabs(f));
      CHECK(sup <= p.confidence_range * (l1_extended(g) + 2.0 * p.radical_mass) + 1e-12);
    }
  }

  SECTION("grid too coarse for the window is rejected") {
    const ModelParams p(0.1, 0.03, 0.1);
    REQUIRE_THROWS_AS(interaction_force(GridDensity::uniform(50), rd, p), std::invalid_argument);
  }
}

TEST_CASE("grid density bookkeeping", "[core]") {
  const GridDensity g = GridDensity::uniform(128);
  CHECK(mass(g) == Approx(1.0).margin(1e-14));
  CHECK(max_asymmetry(g) == 0.0);

  std::mt19937_64 engine(23);
  const GridDensity r = testutil::random_density(128, engine);
  CHECK(mass(r) == Approx(1.0).margin(1e-12));
  CHECK(max_asymmetry(r) < 1e-12);
  CHECK(l2_extended(r) == Approx(std::sqrt(2.0) * l2_unit(r)).margin(1e-12));

  GridDensity skewed = r;
  skewed.values[17] += 1e-6;
  CHECK(max_asymmetry(skewed) > 1e-7);
  symmetrize(skewed);
  CHECK(max_asymmetry(skewed) == 0.0);
}
