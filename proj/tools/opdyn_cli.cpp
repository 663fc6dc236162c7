// Batch front-end: run the solvers and analyses from a config file or flags
// and emit plot-ready CSV plus JSON scalar reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "opdyn/opdyn.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  double sigma = 0.03;
  double big_r = 0.1;
  double big_m = 0.1;
  double a_mean = 0.7;
  double s_width = 0.1;
  int n_f = 128;
  int n_g = 256;
  double dt = 0.01;
  double t_end = 50.0;
  std::uint64_t seed = 1;
  int realizations = 300;
  int agents = 500;
  int bins = 100;
  double gamma_threshold = 1.0;
  double sample_every = 1.0;
  std::string solver = "fourier";
  std::string out_dir = "out";
  int jobs = 0;
  bool bounds_only = false;
  std::string m_sweep;       // lo:hi:step for critical-noise sweeps
  std::string sigma_range = "0.01:0.15:0.01";
  std::string m_range = "0.1:1.0:0.1";
  std::string model = "pde";
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues resolved_config(const Options& o, const std::string& subcommand) {
  KeyValues kv;
  kv.emplace_back("version", opdyn::kVersion);
  kv.emplace_back("subcommand", subcommand);
  kv.emplace_back("sigma", fmt(o.sigma));
  kv.emplace_back("big_r", fmt(o.big_r));
  kv.emplace_back("big_m", fmt(o.big_m));
  kv.emplace_back("a_mean", fmt(o.a_mean));
  kv.emplace_back("s_width", fmt(o.s_width));
  kv.emplace_back("n_f", std::to_string(o.n_f));
  kv.emplace_back("n_g", std::to_string(o.n_g));
  kv.emplace_back("dt", fmt(o.dt));
  kv.emplace_back("t_end", fmt(o.t_end));
  kv.emplace_back("seed", std::to_string(o.seed));
  kv.emplace_back("realizations", std::to_string(o.realizations));
  kv.emplace_back("agents", std::to_string(o.agents));
  kv.emplace_back("bins", std::to_string(o.bins));
  kv.emplace_back("gamma_threshold", fmt(o.gamma_threshold));
  kv.emplace_back("sample_every", fmt(o.sample_every));
  kv.emplace_back("solver", o.solver);
  kv.emplace_back("jobs", std::to_string(o.jobs));
  return kv;
}

std::ofstream open_output(const Options& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  std::ofstream file(std::filesystem::path(o.out_dir) / name, std::ios::trunc);
  if (!file) throw std::invalid_argument("cannot open output file " + name + " under " + o.out_dir);
  return file;
}

void write_header(std::ofstream& file, const KeyValues& kv) {
  for (const auto& [k, v] : kv) file << "# " << k << " = " << v << "\n";
}

json params_json(const KeyValues& kv) {
  json j;
  for (const auto& [k, v] : kv)
    if (k != "version" && k != "subcommand") j[k] = v;
  return j;
}

void write_report(const Options& o, const std::string& subcommand, const json& results) {
  json report;
  report["params"] = params_json(resolved_config(o, subcommand));
  report["results"] = results;
  report["provenance"] = {{"seed", o.seed}, {"version", opdyn::kVersion}, {"timestamp", timestamp_utc()}};
  auto file = open_output(o, "report.json");
  file << report.dump(2) << "\n";
}

opdyn::ModelParams make_params(const Options& o) {
  return opdyn::ModelParams(o.big_r, o.sigma, o.big_m);
}

opdyn::RadicalDensity make_radicals(const Options& o, int max_order) {
  return opdyn::RadicalDensity::triangular(o.a_mean, o.s_width, max_order);
}

std::vector<double> parse_range(const std::string& spec) {
  double lo = 0, hi = 0, step = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0 || hi < lo)
    throw std::invalid_argument("range must be lo:hi:step with a positive step: " + spec);
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + 0.5 * step) break;
    out.push_back(v);
  }
  return out;
}

/// Density values on [0,1] (inclusive endpoints) from a full grid.
std::vector<double> unit_profile(const opdyn::GridDensity& g) {
  std::vector<double> out(static_cast<std::size_t>(g.nodes_per_unit) + 1);
  for (int i = 0; i < g.nodes_per_unit; ++i)
    out[static_cast<std::size_t>(i)] = g.values[static_cast<std::size_t>(g.nodes_per_unit + i)];
  out.back() = g.values[0];
  return out;
}

void write_density_csv(std::ofstream& file, int nodes_per_unit,
                       const std::vector<double>& times,
                       const std::vector<std::vector<double>>& profiles) {
  file << "t";
  for (int i = 0; i <= nodes_per_unit; ++i) file << "," << fmt(static_cast<double>(i) / nodes_per_unit);
  file << "\n";
  for (std::size_t s = 0; s < times.size(); ++s) {
    file << fmt(times[s]);
    for (double v : profiles[s]) file << "," << fmt(v);
    file << "\n";
  }
}

int run_pde(const Options& o) {
  const auto params = make_params(o);
  const auto rd = make_radicals(o, 2 * o.n_f);
  const long stride = std::max<long>(1, std::lround(o.sample_every / o.dt));

  std::vector<double> times;
  std::vector<std::vector<double>> profiles;
  std::vector<double> order_values;
  KeyValues header = resolved_config(o, "pde");

  if (o.solver == "fourier") {
    opdyn::OdeSystem sys = opdyn::build_system(params, rd, o.n_f);
    const Eigen::VectorXd p0 = Eigen::VectorXd::Zero(o.n_f);
    const opdyn::OdeTrajectory traj = opdyn::integrate(sys, p0, o.t_end, o.dt, stride);
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
      const opdyn::GridDensity g =
          opdyn::cosine_synthesize(opdyn::make_state(traj.times[s], traj.states[s]), o.n_g);
      times.push_back(traj.times[s]);
      profiles.push_back(unit_profile(g));
      order_values.push_back(opdyn::mass_order_parameter(g, params.confidence_range));
    }
  } else if (o.solver == "spectral") {
    const opdyn::SpectralTrajectory traj = opdyn::spectral_run(
        opdyn::GridDensity::uniform(o.n_f), rd, params, o.t_end, o.dt, o.n_f, stride);
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
      times.push_back(traj.times[s]);
      profiles.push_back(unit_profile(traj.profiles[s]));
      order_values.push_back(opdyn::mass_order_parameter(traj.profiles[s], params.confidence_range));
    }
    header.emplace_back("min_density", fmt(traj.min_density));
  } else {
    throw std::invalid_argument("solver must be 'fourier' or 'spectral', got '" + o.solver + "'");
  }

  const int out_nodes = o.solver == "fourier" ? o.n_g : o.n_f;
  auto density = open_output(o, "density.csv");
  write_header(density, header);
  write_density_csv(density, out_nodes, times, profiles);

  auto order = open_output(o, "orderparam.csv");
  write_header(order, header);
  order << "t,q_c\n";
  for (std::size_t s = 0; s < times.size(); ++s)
    order << fmt(times[s]) << "," << fmt(order_values[s]) << "\n";
  return kExitOk;
}

int run_sde(const Options& o) {
  opdyn::MonteCarloConfig cfg{make_params(o)};
  cfg.radical_mean = o.a_mean;
  cfg.radical_half_width = o.s_width;
  cfg.agents = o.agents;
  cfg.radicals = static_cast<int>(std::lround(o.big_m * o.agents));
  cfg.dt = o.dt;
  cfg.t_end = o.t_end;
  cfg.realizations = o.realizations;
  cfg.seed = o.seed;
  cfg.bins = o.bins;
  cfg.order_stride = std::max<long>(1, std::lround(o.sample_every / o.dt));
  cfg.jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::thread::hardware_concurrency());
  for (double t = 0.0; t <= o.t_end + 1e-9; t += o.sample_every) cfg.snapshot_times.push_back(t);

  const opdyn::MonteCarloResult result = opdyn::monte_carlo(cfg);
  const KeyValues header = resolved_config(o, "sde");

  auto hist = open_output(o, "histogram.csv");
  write_header(hist, header);
  hist << "t";
  for (int b = 0; b < o.bins; ++b) hist << "," << fmt((b + 0.5) / o.bins);
  hist << "\n";
  for (std::size_t s = 0; s < result.snapshot_times.size(); ++s) {
    hist << fmt(result.snapshot_times[s]);
    for (double v : result.mean_histograms[s]) hist << "," << fmt(v);
    hist << "\n";
  }

  auto order = open_output(o, "orderparam.csv");
  write_header(order, header);
  order << "t,q_d\n";
  for (std::size_t s = 0; s < result.order_times.size(); ++s)
    order << fmt(result.order_times[s]) << "," << fmt(result.mean_order[s]) << "\n";
  return kExitOk;
}

int run_stationary(const Options& o) {
  const auto params = make_params(o);
  const opdyn::NoiseBounds bounds = opdyn::noise_bounds(params);
  const auto eta = opdyn::estimate_eta(params);

  json results;
  results["sigma_b_sq"] = bounds.sigma_b_sq;
  results["c_b"] = bounds.c_b;
  results["sigma_s"] = bounds.sigma_s;
  results["sigma_s_sq"] = bounds.sigma_s_sq;
  results["uniqueness_threshold_sq"] = opdyn::uniqueness_threshold(params.confidence_range);
  if (eta)
    results["eta"] = *eta;
  else
    results["eta"] = nullptr;

  if (!o.bounds_only) {
    const auto rd = make_radicals(o, 1);
    const opdyn::PicardReport picard = opdyn::picard_stationary(rd, params, 1e-10, 500, o.n_g);
    results["picard"] = {{"iterations", picard.iterations},
                         {"residual", picard.residual},
                         {"converged", picard.converged},
                         {"damped", picard.damped}};
    results["lipschitz_l1"] = opdyn::lipschitz_constant(params, 1.0);

    std::vector<std::vector<double>> columns;
    columns.push_back(unit_profile(picard.density));
    bool have_approx = false;
    if (o.a_mean > params.confidence_range && o.a_mean < 1.0 - params.confidence_range) {
      columns.push_back(unit_profile(opdyn::approx_stationary(o.a_mean, params, o.n_g)));
      have_approx = true;
    }
    results["semi_gaussian_valid"] = have_approx;

    auto csv = open_output(o, "stationary.csv");
    write_header(csv, resolved_config(o, "stationary"));
    csv << (have_approx ? "x,fixed_point,semi_gaussian\n" : "x,fixed_point\n");
    for (std::size_t i = 0; i < columns[0].size(); ++i) {
      csv << fmt(static_cast<double>(i) / o.n_g);
      for (const auto& col : columns) csv << "," << fmt(col[i]);
      csv << "\n";
    }
  }

  write_report(o, "stationary", results);
  return kExitOk;
}

int run_critical_noise(const Options& o) {
  const auto rd = make_radicals(o, 2 * o.n_f);
  if (!o.m_sweep.empty()) {
    const std::vector<double> masses = parse_range(o.m_sweep);
    auto csv = open_output(o, "critical_noise.csv");
    KeyValues header = resolved_config(o, "critical-noise");
    header.emplace_back("m_sweep", o.m_sweep);
    write_header(csv, header);
    csv << "big_m,sigma_c,found\n";
    for (double m : masses) {
      const opdyn::CriticalNoiseResult r =
          opdyn::critical_noise(o.big_r, m, rd, o.n_f, o.gamma_threshold);
      csv << fmt(m) << "," << fmt(r.value) << "," << (r.found ? 1 : 0) << "\n";
    }
    return kExitOk;
  }
  const opdyn::CriticalNoiseResult r =
      opdyn::critical_noise(o.big_r, o.big_m, rd, o.n_f, o.gamma_threshold);
  json results;
  results["sigma_c"] = r.value;
  results["found"] = r.found;
  write_report(o, "critical-noise", results);
  return kExitOk;
}

int run_clusters(const Options& o) {
  const auto rd = make_radicals(o, 2 * o.n_f);
  const auto report = opdyn::initial_clusters(make_params(o), rd, o.n_f);
  json results;
  if (!report) {
    results["clustering_predicted"] = false;
  } else {
    results["clustering_predicted"] = true;
    results["n_star"] = report->dominant_mode;
    results["gamma_star"] = report->growth_rate;
    results["c_star"] = report->forcing_rate;
    results["n_clu"] = report->cluster_count;
    results["onset_defined"] = report->onset_defined;
    if (report->onset_defined) results["t_clu"] = report->onset_time;
  }
  write_report(o, "clusters", results);
  return kExitOk;
}

int run_sweep(const Options& o) {
  const std::vector<double> sigmas = parse_range(o.sigma_range);
  const std::vector<double> masses = parse_range(o.m_range);
  const auto rd = make_radicals(o, 2 * o.n_f);

  struct Cell {
    double sigma = 0, m = 0, dt = 0, order = 0;
    int status = kExitOk;
  };
  std::vector<Cell> cells(sigmas.size() * masses.size());
  std::atomic<std::size_t> next{0};

  auto run_cell = [&](std::size_t idx) {
    Cell& cell = cells[idx];
    cell.sigma = sigmas[idx / masses.size()];
    cell.m = masses[idx % masses.size()];
    // fixed-step stability bound for the stiffest diffusion mode
    const double stiff = 0.5 * M_PI * M_PI * cell.sigma * cell.sigma * o.n_f * o.n_f;
    cell.dt = std::min(o.dt, 2.5 / stiff);
    try {
      if (o.model == "sde") {
        opdyn::MonteCarloConfig cfg{opdyn::ModelParams(o.big_r, cell.sigma, cell.m)};
        cfg.radical_mean = o.a_mean;
        cfg.radical_half_width = o.s_width;
        cfg.agents = o.agents;
        cfg.radicals = static_cast<int>(std::lround(cell.m * o.agents));
        cfg.dt = o.dt;
        cell.dt = o.dt;
        cfg.t_end = o.t_end;
        cfg.realizations = o.realizations;
        cfg.seed = opdyn::derive_seed(o.seed, idx);
        cfg.order_stride = std::max<long>(1, std::lround(o.t_end / o.dt));
        cfg.jobs = 1;
        const auto result = opdyn::monte_carlo(cfg);
        cell.order = result.mean_order.back();
      } else {
        const opdyn::ModelParams params(o.big_r, cell.sigma, cell.m);
        opdyn::OdeSystem sys = opdyn::build_system(params, rd, o.n_f);
        const long steps = std::lround(o.t_end / cell.dt);
        const auto traj =
            opdyn::integrate(sys, Eigen::VectorXd::Zero(o.n_f), o.t_end, cell.dt, steps);
        const opdyn::GridDensity g =
            opdyn::cosine_synthesize(opdyn::make_state(o.t_end, traj.states.back()), o.n_g);
        cell.order = opdyn::mass_order_parameter(g, o.big_r);
      }
    } catch (const opdyn::IntegrationError&) {
      cell.order = std::numeric_limits<double>::quiet_NaN();
      cell.status = kExitNumerical;
    }
  };

  const int jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) run_cell(i);
      });
    for (auto& th : pool) th.join();
  }

  auto csv = open_output(o, "sweep.csv");
  KeyValues header = resolved_config(o, "sweep");
  header.emplace_back("sigma_range", o.sigma_range);
  header.emplace_back("m_range", o.m_range);
  header.emplace_back("model", o.model);
  write_header(csv, header);
  csv << "sigma,big_m,dt,order_parameter,status\n";
  for (const Cell& cell : cells)
    csv << fmt(cell.sigma) << "," << fmt(cell.m) << "," << fmt(cell.dt) << "," << fmt(cell.order)
        << "," << cell.status << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded-confidence opinion dynamics with radicals and noise"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (INI-style key = value, sections per subcommand)");

  Options o;
  o.model = "pde";
  auto add_common = [&o](CLI::App* cmd) {
    cmd->fallthrough();  // lets --config (defined on the parent) follow the subcommand
    cmd->add_option("--sigma", o.sigma, "Noise level");
    cmd->add_option("--big-r", o.big_r, "Confidence range");
    cmd->add_option("--big-m", o.big_m, "Relative radical mass");
    cmd->add_option("--a-mean", o.a_mean, "Mean radical opinion");
    cmd->add_option("--s-width", o.s_width, "Radical half-width");
    cmd->add_option("--n-f", o.n_f, "Mode truncation");
    cmd->add_option("--n-g", o.n_g, "Grid nodes per unit interval");
    cmd->add_option("--dt", o.dt, "Time step");
    cmd->add_option("--t-end", o.t_end, "End time");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--realizations", o.realizations, "Monte Carlo realizations");
    cmd->add_option("--agents", o.agents, "Normal agent count");
    cmd->add_option("--bins", o.bins, "Histogram bins");
    cmd->add_option("--gamma-threshold", o.gamma_threshold, "Disorder threshold on the linear equilibrium");
    cmd->add_option("--sample-every", o.sample_every, "Output sampling interval");
    cmd->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
    cmd->add_option("--out", o.out_dir, "Output directory");
  };

  CLI::App* pde = app.add_subcommand("pde", "Mean-field trajectory (fourier or spectral solver)");
  add_common(pde);
  pde->add_option("--solver", o.solver, "fourier | spectral");

  CLI::App* sde = app.add_subcommand("sde", "Monte Carlo ensemble of the agent model");
  add_common(sde);

  CLI::App* stationary = app.add_subcommand("stationary", "Stationary state, approximation and bounds");
  add_common(stationary);
  stationary->add_flag("--bounds-only", o.bounds_only, "Emit only the closed-form bounds report");

  CLI::App* critical = app.add_subcommand("critical-noise", "Order-disorder transition level");
  add_common(critical);
  critical->add_option("--m-sweep", o.m_sweep, "Sweep radical mass lo:hi:step");

  CLI::App* clusters = app.add_subcommand("clusters", "Initial clustering prediction");
  add_common(clusters);

  CLI::App* sweep = app.add_subcommand("sweep", "Order parameter over a sigma x mass grid");
  add_common(sweep);
  sweep->add_option("--sigma-range", o.sigma_range, "lo:hi:step");
  sweep->add_option("--m-range", o.m_range, "lo:hi:step");
  sweep->add_option("--model", o.model, "pde | sde");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (pde->parsed()) return run_pde(o);
    if (sde->parsed()) return run_sde(o);
    if (stationary->parsed()) return run_stationary(o);
    if (critical->parsed()) return run_critical_noise(o);
    if (clusters->parsed()) return run_clusters(o);
    if (sweep->parsed()) return run_sweep(o);
  } catch (const opdyn::IntegrationError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
