#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "opdyn/core.hpp"

namespace opdyn {

/// Derives an independent stream seed from a master seed and a stream index
/// (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Even 2-periodic fold of a real value into [0,1]: wrap by period 2, then
/// reflect the upper half.
inline double fold_opinion(double x) {
  double y = std::fmod(x, 2.0);
  if (y < 0.0) y += 2.0;
  return y > 1.0 ? 2.0 - y : y;
}

/// i.i.d. draws from the triangular density by inverse transform sampling.
inline std::vector<double> sample_radicals(double mean, double half_width, int count,
                                           std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("sample_radicals: count must be >= 0");
  if (!(half_width > 0.0) || mean - half_width < 0.0 || mean + half_width > 1.0)
    throw std::invalid_argument("sample_radicals: support must stay inside [0,1]");
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& x : out) {
    const double u = unit(engine);
    x = u < 0.5 ? mean - half_width + half_width * std::sqrt(2.0 * u)
                : mean + half_width - half_width * std::sqrt(2.0 * (1.0 - u));
  }
  return out;
}

/// Normal opinions plus fixed radical opinions. Radical opinions never change
/// after construction; normal opinions stay in [0,1] through folding.
struct AgentEnsemble {
  std::vector<double> opinions;
  std::vector<double> radical_opinions;
  std::uint64_t seed = 0;
  double time = 0.0;
};

inline AgentEnsemble make_ensemble(int agents, int radicals, const RadicalDensity& rd,
                                   std::uint64_t seed) {
  AgentEnsemble ens;
  ens.seed = seed;
  ens.radical_opinions = radicals > 0
                             ? sample_radicals(rd.mean, rd.half_width, radicals, derive_seed(seed, 101))
                             : std::vector<double>{};
  std::mt19937_64 engine(derive_seed(seed, 202));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ens.opinions.resize(static_cast<std::size_t>(agents));
  for (auto& x : ens.opinions) x = unit(engine);
  return ens;
}

/// Per-agent drift from all normal and radical opinions together with their
/// mirrored images. Interactions are found through a sorted window over the
/// tripled image list; membership uses the same |d| <= R comparison as a
/// direct pass over the images.
inline std::vector<double> drift(const std::vector<double>& opinions,
                                 const std::vector<double>& radical_opinions,
                                 double confidence_range) {
  const std::size_t n = opinions.size();
  std::vector<double> images;
  images.reserve(3 * (opinions.size() + radical_opinions.size()));
  auto add_images = [&images](double x) {
    images.push_back(x);
    images.push_back(-x);
    images.push_back(2.0 - x);
  };
  for (double x : opinions) add_images(x);
  for (double x : radical_opinions) add_images(x);
  std::sort(images.begin(), images.end());

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = opinions[i];
    auto it = std::lower_bound(images.begin(), images.end(), xi - confidence_range);
    while (it != images.begin() && std::fabs(xi - *(it - 1)) <= confidence_range) --it;
    while (it != images.end() && std::fabs(xi - *it) > confidence_range) ++it;
    double acc = 0.0;
    for (; it != images.end() && std::fabs(xi - *it) <= confidence_range; ++it) acc += *it - xi;
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

/// One Euler-Maruyama step; the Gaussian increments come from `engine`.
inline void em_step(AgentEnsemble& ens, const ModelParams& p, double dt, std::mt19937_64& engine) {
  if (!(dt > 0.0)) throw std::invalid_argument("em_step: dt must be positive");
  const std::vector<double> d = drift(ens.opinions, ens.radical_opinions, p.confidence_range);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double root_dt = std::sqrt(dt);
  for (std::size_t i = 0; i < ens.opinions.size(); ++i)
    ens.opinions[i] = fold_opinion(ens.opinions[i] + d[i] * dt + p.noise * gauss(engine) * root_dt);
  ens.time += dt;
}

/// Fraction of ordered agent pairs (within the confidence range of each
/// other), self-pairs included. Sorted sweep; pair counts match a direct
/// double loop exactly.
inline double pair_order_parameter(const std::vector<double>& opinions, double confidence_range) {
  if (opinions.empty()) throw std::invalid_argument("pair_order_parameter: empty ensemble");
  std::vector<double> sorted(opinions);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  long long pairs = 0;
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (lo < n && std::fabs(sorted[i] - sorted[lo]) > confidence_range) ++lo;
    if (hi < lo) hi = lo;
    while (hi < n && std::fabs(sorted[hi] - sorted[i]) <= confidence_range) ++hi;
    pairs += static_cast<long long>(hi - lo);
  }
  return static_cast<double>(pairs) / (static_cast<double>(n) * static_cast<double>(n));
}

struct MonteCarloConfig {
  ModelParams params;
  double radical_mean = 0.7;
  double radical_half_width = 0.1;
  int agents = 500;
  int radicals = 50;
  double dt = 0.01;
  double t_end = 50.0;
  int realizations = 300;
  std::uint64_t seed = 1;
  int bins = 100;
  long order_stride = 10;                // record the order parameter every this many steps
  std::vector<double> snapshot_times;    // times at which histograms are recorded
  int jobs = 1;
};

struct MonteCarloResult {
  std::vector<double> snapshot_times;
  std::vector<std::vector<double>> mean_histograms;  // per snapshot, density scale over [0,1]
  std::vector<double> order_times;
  std::vector<double> mean_order;
};

/// Monte Carlo over independent realizations. Each realization draws its own
/// radicals, initial opinions and noise from streams derived from the master
/// seed, so results do not depend on thread scheduling. Aggregation reduces
/// per-realization outputs in realization order.
inline MonteCarloResult monte_carlo(const MonteCarloConfig& cfg) {
  if (cfg.realizations < 1) throw std::invalid_argument("monte_carlo: need at least one realization");
  if (cfg.bins < 1) throw std::invalid_argument("monte_carlo: need at least one bin");

  const long steps = std::lround(cfg.t_end / cfg.dt);
  std::vector<long> snapshot_steps;
  snapshot_steps.reserve(cfg.snapshot_times.size());
  for (double t : cfg.snapshot_times) snapshot_steps.push_back(std::lround(t / cfg.dt));

  std::vector<long> order_steps;
  for (long s = 0; s <= steps; s += std::max<long>(1, cfg.order_stride)) order_steps.push_back(s);

  struct Realization {
    std::vector<std::vector<double>> histograms;
    std::vector<double> order;
  };
  std::vector<Realization> results(static_cast<std::size_t>(cfg.realizations));

  const RadicalDensity rd = RadicalDensity::triangular(cfg.radical_mean, cfg.radical_half_width, 1);

  auto run_one = [&](int r) {
    const std::uint64_t seed_r = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    AgentEnsemble ens = make_ensemble(cfg.agents, cfg.radicals, rd, seed_r);
    std::mt19937_64 noise_engine(derive_seed(seed_r, 303));

    Realization& out = results[static_cast<std::size_t>(r)];
    out.histograms.assign(snapshot_steps.size(), std::vector<double>(static_cast<std::size_t>(cfg.bins), 0.0));
    out.order.reserve(order_steps.size());

    auto record = [&](long step) {
      for (std::size_t s = 0; s < snapshot_steps.size(); ++s) {
        if (snapshot_steps[s] != step) continue;
        auto& hist = out.histograms[s];
        const double scale = cfg.bins / static_cast<double>(cfg.agents);
        for (double x : ens.opinions) {
          int b = static_cast<int>(x * cfg.bins);
          b = std::clamp(b, 0, cfg.bins - 1);
          hist[static_cast<std::size_t>(b)] += scale;
        }
      }
      if (std::binary_search(order_steps.begin(), order_steps.end(), step))
        out.order.push_back(pair_order_parameter(ens.opinions, cfg.params.confidence_range));
    };

    record(0);
    for (long step = 1; step <= steps; ++step) {
      em_step(ens, cfg.params, cfg.dt, noise_engine);
      record(step);
    }
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (int r = 0; r < cfg.realizations; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < cfg.realizations; r = next.fetch_add(1)) run_one(r);
      });
    for (auto& th : pool) th.join();
  }

  MonteCarloResult agg;
  agg.snapshot_times = cfg.snapshot_times;
  agg.mean_histograms.assign(snapshot_steps.size(), std::vector<double>(static_cast<std::size_t>(cfg.bins), 0.0));
  for (long s : order_steps) agg.order_times.push_back(s * cfg.dt);
  agg.mean_order.assign(order_steps.size(), 0.0);

  const double inv_r = 1.0 / cfg.realizations;
  for (const auto& real : results) {
    for (std::size_t s = 0; s < agg.mean_histograms.size(); ++s)
      for (std::size_t b = 0; b < agg.mean_histograms[s].size(); ++b)
        agg.mean_histograms[s][b] += real.histograms[s][b] * inv_r;
    for (std::size_t k = 0; k < agg.mean_order.size(); ++k) agg.mean_order[k] += real.order[k] * inv_r;
  }
  return agg;
}

}  // namespace opdyn
