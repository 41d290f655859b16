/* Copyright 2026 The Shuttle Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// shuttle: landscape generation, simulation sweeps, trajectory optimization,
// ensemble statistics and closed-form diagnostics.
//
// Exit status: 0 success, 1 if any task failed, 2 on configuration errors.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "shuttle/analysis.hpp"
#include "shuttle/config.hpp"
#include "shuttle/io/manifest.hpp"
#include "shuttle/io/plot.hpp"
#include "shuttle/io/tables.hpp"
#include "shuttle/parallel.hpp"

namespace fs = std::filesystem;
using namespace shuttle;

namespace {

constexpr int kExitTaskFailure = 1;
constexpr int kExitConfig = 2;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out = "out";
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Shared state of one command invocation.
struct Run {
  Config config;
  Globals g;
  io::RunManifest manifest;
  Clock::time_point start = Clock::now();
  std::mutex log_mu;

  Run(Config c, Globals globals, const std::string& command, std::vector<std::string> argv)
      : config(std::move(c)), g(std::move(globals)), manifest(command, config.to_ini(), std::move(argv)) {}

  fs::path out(const fs::path& rel) const { return fs::path(g.out) / rel; }

  void log(const std::string& msg) {
    std::lock_guard lock(log_mu);
    std::fprintf(stderr, "%s\n", msg.c_str());
  }

  // Runs one task, recording timing and failure without stopping the campaign.
  template <class F>
  void task(const std::string& name, std::uint64_t seed, F&& f) {
    const auto t0 = Clock::now();
    io::TaskRecord rec{name, seed, true, 0.0, {}};
    try {
      f();
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      log("task " + name + " failed: " + e.what());
    }
    rec.wall_seconds = seconds_since(t0);
    manifest.add_task(std::move(rec));
  }

  void write_output(const fs::path& path, const io::Table& t) {
    io::write_table(path, t);
    manifest.add_output(path);
  }

  int finish() {
    manifest.set_wall_seconds(seconds_since(start));
    manifest.write(out("manifest.json"));
    const std::size_t failed = manifest.failures();
    if (failed) {
      log(std::to_string(failed) + " task(s) failed; see " + out("manifest.json").string());
      return kExitTaskFailure;
    }
    return 0;
  }
};

std::vector<ValleyLandscape> load_landscapes(Run& run, const std::vector<std::string>& files) {
  if (files.empty()) throw ConfigError("no landscape files given");
  std::vector<ValleyLandscape> lands;
  const std::string expected = well_params_digest(run.config.well);
  for (const auto& f : files) {
    lands.push_back(io::read_landscape(f));
    run.manifest.add_input(f);
    if (lands.back().params_digest() != expected)
      run.log("warning: " + f + " was generated with parameters " + lands.back().params_digest() +
              ", the configuration gives " + expected);
  }
  return lands;
}

PhysicalParams sweep_params(const Config& c, double T1v, double kappa) {
  PhysicalParams p = c.physical;
  p.T1v = T1v;
  p.kappa_z = kappa;
  return p;
}

StepPolicy policy_of(const Config& c) {
  StepPolicy p;
  p.scale = c.simulation.dt_scale;
  return p;
}

// Tidy percentile rows: coordinates..., quantity, quantile, value.
void add_percentile_rows(io::Table& t, const std::vector<std::string>& coords, const std::string& quantity,
                         const std::vector<double>& values, const std::vector<double>& quantiles) {
  for (double q : quantiles) {
    std::vector<std::string> row = coords;
    row.push_back(quantity);
    row.push_back(io::num(q));
    row.push_back(io::num(percentile(values, q)));
    t.rows.push_back(std::move(row));
  }
}

// ------------------------------------------------------------------ generate

int cmd_generate(Run& run, std::optional<int> n_override) {
  const Config& c = run.config;
  const int n = n_override.value_or(c.generate.n_landscapes);
  if (n <= 0) throw ConfigError("nothing to generate (n_landscapes = " + std::to_string(n) + ")");
  const std::uint64_t base = run.g.seed.value_or(c.generate.seed_base);

  std::vector<std::optional<LandscapeStats>> stats(static_cast<std::size_t>(n));
  parallel_for(stats.size(), run.g.jobs, [&](std::size_t i) {
    const std::uint64_t seed = base + i;
    run.task("generate/" + std::to_string(seed), seed, [&] {
      const ValleyLandscape land = generate_landscape(c.well, seed);
      const fs::path path = run.out("landscapes/landscape_" + std::to_string(seed) + ".csv");
      io::write_landscape(path, land, c.well);
      run.manifest.add_output(path);
      stats[i] = landscape_stats(land);
    });
  });

  io::Table t;
  t.kind = "landscape_stats";
  t.columns = {"seed", "ev_mean_ueV", "ev_std_ueV", "minima_count", "mean_minima_spacing_nm"};
  std::vector<LandscapeStats> ok;
  for (std::size_t i = 0; i < stats.size(); ++i)
    if (stats[i]) {
      ok.push_back(*stats[i]);
      t.add_row({static_cast<double>(base + i), stats[i]->ev_mean, stats[i]->ev_std,
                 static_cast<double>(stats[i]->minima_count), stats[i]->mean_minima_spacing});
    }
  if (!ok.empty()) {
    const auto e = pool_landscape_stats(ok);
    t.set("ensemble_ev_mean_ueV", e.ev_mean);
    t.set("ensemble_ev_std_ueV", e.ev_std);
    t.set("ensemble_minima_mean", e.minima_mean);
    t.set("ensemble_minima_std", e.minima_std);
    t.set("landscapes", std::to_string(e.count));
    std::printf("%zu landscapes: E_V %.2f +- %.2f ueV, minima %.1f +- %.1f per %.0f nm\n", e.count,
                e.ev_mean, e.ev_std, e.minima_mean, e.minima_std, c.well.device_length);
  }
  run.write_output(run.out("landscape_stats.csv"), t);
  return run.finish();
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(Run& run, const std::vector<std::string>& files) {
  const Config& c = run.config;
  const auto lands = load_landscapes(run, files);
  struct Point {
    double v, T1v, kappa;
  };
  std::vector<Point> points;
  for (double v : c.simulation.speeds)
    for (double T1v : c.simulation.T1v_values)
      for (double k : c.simulation.kappa_values) points.push_back({v, T1v, k});

  struct Final {
    double infidelity, p_excited, purity_spin;
  };
  std::vector<std::optional<Final>> finals(lands.size() * points.size());
  parallel_for(finals.size(), run.g.jobs, [&](std::size_t idx) {
    const ValleyLandscape& land = lands[idx / points.size()];
    const Point& pt = points[idx % points.size()];
    const std::string name = "s" + std::to_string(land.seed()) + "_v" + tag(pt.v) + "_T1v" + tag(pt.T1v) +
                             "_k" + tag(pt.kappa);
    run.task("simulate/" + name, land.seed(), [&] {
      const PhysicalParams p = sweep_params(c, pt.T1v, pt.kappa);
      const ShuttleTrajectory traj(pt.v, c.simulation.length);
      SimulationOptions opt;
      opt.policy = policy_of(c);
      opt.record_points = c.simulation.record_points;
      const SimulationResult r = simulate(land, traj, p, opt);
      const fs::path path = run.out("simulations/sim_" + name + ".csv");
      run.write_output(path, io::simulation_table(r, traj, p));
      const auto& last = r.records.back();
      finals[idx] = Final{r.final_infidelity, last.p_excited, last.purity_spin};
    });
  });

  io::Table t;
  t.kind = "simulation_summary";
  t.columns = {"speed", "T1v", "kappa_z", "quantity", "quantile", "value"};
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    std::vector<double> inf, pe, ps;
    for (std::size_t li = 0; li < lands.size(); ++li)
      if (const auto& f = finals[li * points.size() + pi]) {
        inf.push_back(f->infidelity);
        pe.push_back(f->p_excited);
        ps.push_back(f->purity_spin);
      }
    if (inf.empty()) continue;
    const auto& pt = points[pi];
    const std::vector<std::string> coords{io::num(pt.v), io::num(pt.T1v), io::num(pt.kappa)};
    add_percentile_rows(t, coords, "final_infidelity", inf, c.simulation.quantiles);
    add_percentile_rows(t, coords, "final_p_excited", pe, c.simulation.quantiles);
    add_percentile_rows(t, coords, "final_purity_spin", ps, c.simulation.quantiles);
    std::printf("v = %g m/s, T1v = %g ns, kappa_z = %g meV: median final infidelity %.4g over %zu landscapes\n",
                pt.v, pt.T1v, pt.kappa, percentile(inf, 0.5), inf.size());
  }
  run.write_output(run.out("simulation_summary.csv"), t);
  return run.finish();
}

// ------------------------------------------------------------------ optimize

int cmd_optimize(Run& run, const std::vector<std::string>& files) {
  const Config& c = run.config;
  const auto lands = load_landscapes(run, files);
  struct Point {
    double v, T1v, kappa;
    std::size_t M;
  };
  std::vector<Point> points;
  for (double v : c.simulation.speeds)
    for (double T1v : c.simulation.T1v_values)
      for (double k : c.simulation.kappa_values)
        for (std::size_t M : c.optimizer.M_values) points.push_back({v, T1v, k, M});

  struct Outcome {
    double initial, optimized, purity_spin;
  };
  std::vector<std::optional<Outcome>> outcomes(lands.size() * points.size());
  parallel_for(outcomes.size(), run.g.jobs, [&](std::size_t idx) {
    const ValleyLandscape& land = lands[idx / points.size()];
    const Point& pt = points[idx % points.size()];
    const std::string name = "s" + std::to_string(land.seed()) + "_v" + tag(pt.v) + "_T1v" + tag(pt.T1v) +
                             "_k" + tag(pt.kappa) + "_M" + std::to_string(pt.M);
    run.task("optimize/" + name, land.seed(), [&] {
      OptimizationProblem pr;
      pr.landscape = &land;
      pr.params = sweep_params(c, pt.T1v, pt.kappa);
      pr.speed = pt.v;
      pr.length = c.simulation.length;
      pr.M = pt.M;
      pr.policy = policy_of(c);
      pr.mode = c.optimizer.mode;
      pr.fd_step = c.optimizer.fd_step;
      pr.stopping = c.optimizer.stopping;
      pr.coefficient_bound = c.optimizer.coefficient_bound;
      const OptimizationResult r = optimize(pr);

      SimulationOptions so;
      so.policy = pr.policy;
      so.record_points = 1;
      const SimulationResult final_run = simulate(land, pr.trajectory(r.u_star), pr.params, so);

      io::Table log = io::optimization_log(r);
      log.set("seed", std::to_string(land.seed()));
      log.set("speed", pt.v);
      log.set("T1v", pt.T1v);
      log.set("kappa_z", pt.kappa);
      log.set("M", std::to_string(pt.M));
      log.set("length", c.simulation.length);
      log.set("final_purity_spin", final_run.records.back().purity_spin);
      log.set("final_p_excited", final_run.records.back().p_excited);
      run.write_output(run.out("optimizations/opt_" + name + ".csv"), log);
      outcomes[idx] = Outcome{r.initial_cost, r.cost, final_run.records.back().purity_spin};
    });
  });

  io::Table t;
  t.kind = "optimization_summary";
  t.columns = {"speed", "T1v", "kappa_z", "M", "quantity", "quantile", "value"};
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    std::vector<double> init, opt, pur;
    for (std::size_t li = 0; li < lands.size(); ++li)
      if (const auto& o = outcomes[li * points.size() + pi]) {
        init.push_back(o->initial);
        opt.push_back(o->optimized);
        pur.push_back(o->purity_spin);
      }
    if (opt.empty()) continue;
    const auto& pt = points[pi];
    const std::vector<std::string> coords{io::num(pt.v), io::num(pt.T1v), io::num(pt.kappa),
                                          std::to_string(pt.M)};
    add_percentile_rows(t, coords, "initial_infidelity", init, c.simulation.quantiles);
    add_percentile_rows(t, coords, "optimized_infidelity", opt, c.simulation.quantiles);
    add_percentile_rows(t, coords, "final_purity_spin", pur, c.simulation.quantiles);
    std::printf("v = %g m/s, M = %zu, T1v = %g ns: median infidelity %.4g -> %.4g over %zu landscapes\n", pt.v,
                pt.M, pt.T1v, percentile(init, 0.5), percentile(opt, 0.5), opt.size());
  }
  run.write_output(run.out("optimization_summary.csv"), t);
  return run.finish();
}

// --------------------------------------------------------------------- stats

int cmd_stats(Run& run, const std::vector<std::string>& files, std::vector<double> quantiles) {
  if (files.empty()) throw ConfigError("stats: no result files given");
  if (quantiles.empty()) quantiles = run.config.simulation.quantiles;
  for (double q : quantiles)
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantiles must lie in [0, 1]");

  // Group traces by sweep point.
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<io::Table>> groups;
  for (const auto& f : files) {
    io::Table t = io::read_table(f, "simulation");
    run.manifest.add_input(f);
    groups[{t.get("speed"), t.get("T1v"), t.get("kappa_z")}].push_back(std::move(t));
  }

  std::vector<io::BandSeries> inf_series, pe_series;
  for (const auto& [key, tables] : groups) {
    const auto& [v, T1v, k] = key;
    const std::string name = "v" + tag(std::stod(v)) + "_T1v" + tag(std::stod(T1v)) + "_k" + tag(std::stod(k));
    run.task("stats/" + name, 0, [&] {
      const std::size_t n = tables.front().rows.size();
      for (const auto& t : tables)
        if (t.rows.size() != n)
          throw Error("traces at " + name + " have different record counts; use equal record_points");
      const io::Table& first = tables.front();
      const std::size_t ct = first.column("t_ns"), cx = first.column("x_nm");
      io::Table out;
      out.kind = "trace_percentiles";
      out.set("speed", v);
      out.set("T1v", T1v);
      out.set("kappa_z", k);
      out.set("traces", std::to_string(tables.size()));
      out.columns = {"t_ns", "x_nm", "quantity", "quantile", "value"};
      std::map<std::string, io::BandSeries> bands;
      for (const std::string quantity : {"infidelity", "p_excited", "purity_spin"}) {
        std::vector<std::vector<double>> per_seed;
        for (const auto& t : tables) {
          const std::size_t col = t.column(quantity);
          std::vector<double> trace(n);
          for (std::size_t r = 0; r < n; ++r) trace[r] = t.number(r, col);
          per_seed.push_back(std::move(trace));
        }
        const EnsembleStats st = ensemble_percentiles(per_seed, quantiles);
        const EnsembleStats quart = ensemble_percentiles(per_seed, {0.25, 0.5, 0.75});
        io::BandSeries band;
        band.label = "v = " + v + " m/s, median and quartiles";
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t q = 0; q < quantiles.size(); ++q)
            out.rows.push_back({first.rows[r][ct], first.rows[r][cx], quantity, io::num(quantiles[q]),
                                io::num(st.at(r, q))});
          band.x.push_back(first.number(r, cx) * 1e-3);
          band.lo.push_back(quart.at(r, 0));
          band.mid.push_back(quart.at(r, 1));
          band.hi.push_back(quart.at(r, 2));
        }
        bands[quantity] = std::move(band);
      }
      run.write_output(run.out("stats/trace_percentiles_" + name + ".csv"), out);
      const fs::path svg = run.out("stats/infidelity_" + name + ".svg");
      io::write_band_plot(svg, {bands["infidelity"]},
                          {"Infidelity along the channel (" + name + ")", "position (um)", "1 - F", true});
      run.manifest.add_output(svg);
      const fs::path svg2 = run.out("stats/p_excited_" + name + ".svg");
      io::write_band_plot(svg2, {bands["p_excited"]},
                          {"Excited valley population (" + name + ")", "position (um)", "P_e", false});
      run.manifest.add_output(svg2);
      std::printf("%s: %zu traces, median final infidelity %.4g\n", name.c_str(), tables.size(),
                  bands["infidelity"].mid.back());
    });
  }
  return run.finish();
}

// ------------------------------------------------------------------ diagnose

int cmd_diagnose(Run& run, const std::vector<std::string>& files) {
  const Config& c = run.config;
  std::vector<ValleyLandscape> lands;
  if (!files.empty()) lands = load_landscapes(run, files);
  io::Table t;
  t.kind = "diagnostics";
  t.set("T2_star", c.physical.T2_star);
  t.set("l_c", c.physical.l_c);
  t.set("Gamma_v", c.hotspot.Gamma_v);
  t.set("Delta_so", c.hotspot.Delta_so);
  t.set("landscapes", std::to_string(lands.size()));
  t.columns = {"speed", "duration_ns", "T_phi_ns", "dephasing_infidelity", "hotspot_infidelity_mean"};
  const HotspotParams hp = HotspotParams::from_physical(c.physical, c.hotspot.Gamma_v, c.hotspot.Delta_so);
  for (double v : c.hotspot.speeds) {
    const double T = c.simulation.length / v;
    const double tphi = motional_narrowing_Tphi(v, c.physical.T2_star, c.physical.l_c);
    const double deph = 1.0 - dephasing_channel_fidelity(T, tphi);
    double hot = std::numeric_limits<double>::quiet_NaN();
    if (!lands.empty()) {
      std::vector<double> per(lands.size());
      const double dt = policy_of(c).dt_ps(v) * 1e-3;
      parallel_for(lands.size(), run.g.jobs,
                   [&](std::size_t i) { per[i] = hotspot_infidelity(lands[i], v, hp, dt); });
      hot = 0.0;
      for (double x : per) hot += x / static_cast<double>(per.size());
    }
    t.add_row({v, T, tphi, deph, hot});
    std::printf("v = %g m/s: T_phi = %.4g ns, dephasing 1-F = %.4g, hotspot 1-F = %.4g\n", v, tphi, deph, hot);
  }
  run.write_output(run.out("diagnostics.csv"), t);
  return run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin shuttling through valley landscapes: generate, simulate, optimize, analyse"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "first landscape seed (overrides generate.seed_base)");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output directory");

  std::optional<int> n;
  std::vector<std::string> files;
  std::vector<double> quantiles;
  auto* gen = app.add_subcommand("generate", "generate landscape files and ensemble statistics");
  gen->add_option("-n,--count", n, "number of landscapes (overrides generate.n_landscapes)");
  auto* sim = app.add_subcommand("simulate", "constant-speed sweeps over landscape files");
  sim->add_option("landscapes", files, "landscape files")->required();
  auto* opt = app.add_subcommand("optimize", "optimize trajectories on landscape files");
  opt->add_option("landscapes", files, "landscape files")->required();
  auto* st = app.add_subcommand("stats", "percentile tables and plots of simulation traces");
  st->add_option("results", files, "simulation result files");
  st->add_option("--quantiles", quantiles, "quantiles in [0, 1]")->delimiter(',');
  auto* diag = app.add_subcommand("diagnose", "dephasing and hotspot diagnostics");
  diag->add_option("landscapes", files, "landscape files for the hotspot estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    Config config = g.config_path.empty() ? Config{} : Config::load(g.config_path);
    if (g.seed) config.generate.seed_base = *g.seed;
    config.validate();
    std::vector<std::string> args(argv, argv + argc);
    auto* sub = app.get_subcommands().front();
    Run run(config, g, sub->get_name(), args);
    fs::create_directories(g.out);
    if (sub == gen) return cmd_generate(run, n);
    if (sub == sim) return cmd_simulate(run, files);
    if (sub == opt) return cmd_optimize(run, files);
    if (sub == st) return cmd_stats(run, files, quantiles);
    return cmd_diagnose(run, files);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitTaskFailure;
  }
}
