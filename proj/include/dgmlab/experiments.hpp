#pragma once

// Scenario runs, N-sweeps, manifests and reports.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgmlab/coefficients.hpp"
#include "dgmlab/config.hpp"
#include "dgmlab/csv.hpp"
#include "dgmlab/error.hpp"
#include "dgmlab/graphs.hpp"
#include "dgmlab/meanfield.hpp"
#include "dgmlab/metrics.hpp"
#include "dgmlab/particle_sim.hpp"
#include "dgmlab/vfp.hpp"

#ifndef DGMLAB_VERSION
#define DGMLAB_VERSION "0.1.0"
#endif

namespace dgmlab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Columns whose values depend on the machine clock.
inline bool is_wallclock_column(const std::string& name) {
  return name == "runtime_s" || name == "wallclock_seconds";
}

struct CheckpointRow {
  double t = 0.0;
  double w2_pooled = kNaN, w2_wn2 = kNaN, w2_wninf = kNaN;
};

struct SweepRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double dinf_drift = kNaN, dinf_noise = kNaN;
  double growth_stat_drift = 0.0, growth_stat_noise = 0.0;
  double coupling_mean = kNaN, coupling_bound = kNaN;
  double w2_pooled_T = kNaN, w2_wn2_T = kNaN, w2_wninf_T = kNaN;
  double runtime_s = 0.0;
  std::vector<CheckpointRow> checkpoints;
};

struct StudyResult {
  std::vector<SweepRow> rows;
  double slope = kNaN;
  std::optional<MeanFieldSolution> solution;
  std::optional<DigraphMeasure> limit_drift, limit_noise;
};

// Least-squares slope of log(y) on log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "loglog_slope: size mismatch");
  if (x.size() < 2) return kNaN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return kNaN;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? kNaN : (n * sxy - sx * sy) / den;
}

// Slope of per-N seed means of coupling_mean against N.
inline double coupling_slope(const std::vector<SweepRow>& rows) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& r : rows) {
    auto& [sum, count] = acc[r.n];
    sum += r.coupling_mean;
    ++count;
  }
  std::vector<double> xs, ys;
  for (const auto& [n, sc] : acc) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(sc.first / static_cast<double>(sc.second));
  }
  return loglog_slope(xs, ys);
}

namespace detail {

// Runs one stage, prefixing failures with the stage name and keeping the
// error category.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError("stage '" + name + "': " + e.what());
  } catch (const UnsupportedError& e) {
    throw UnsupportedError("stage '" + name + "': " + e.what());
  } catch (const std::exception& e) {
    throw RuntimeFailure("stage '" + name + "': " + e.what());
  }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

struct StudyOptions {
  bool require_three_sizes = true;
  std::function<void(const std::string&)> progress;
};

inline StudyResult convergence_study(const ScenarioConfig& cfg, const StudyOptions& opt = {}) {
  if (opt.require_three_sizes) require(cfg.sweep.size() >= 3, "convergence_study: sweep needs at least 3 values of N");
  const auto cs = build_coefficients(cfg.drift, cfg.interaction, cfg.noise, cfg.dimension, cfg.box_radius);
  const TimeGrid grid(cfg.t_final, cfg.steps);
  StudyResult res;

  if (cfg.has_limit) {
    detail::stage("limit_dgm", [&] {
      res.limit_drift = dgm_limit(cfg.limit_drift, cfg.limit_grid);
      res.limit_noise = dgm_limit(cfg.limit_noise, cfg.limit_grid);
    });
    detail::stage("picard_solve", [&] {
      PicardOptions po;
      po.u_grid = midpoint_grid(cfg.meanfield.u_points);
      po.samples = cfg.meanfield.samples;
      po.tol = cfg.meanfield.tol;
      po.max_iter = cfg.meanfield.max_iter;
      po.seed = cfg.meanfield_seed();
      po.workers = cfg.workers;
      res.solution = picard_solve(*res.limit_drift, *res.limit_noise, cs, cfg.initial, grid, po);
      if (opt.progress)
        opt.progress("picard_solve: " + std::to_string(res.solution->iteration_log.size()) + " iterates, converged=" +
                     (res.solution->converged ? "true" : "false"));
    });
  }

  std::vector<std::size_t> checkpoint_steps;
  for (double t : cfg.checkpoints) checkpoint_steps.push_back(grid.index_of(t));

  for (std::size_t n : cfg.sweep)
    for (std::uint64_t seed : cfg.seeds) {
      const auto t0 = std::chrono::steady_clock::now();
      SweepRow row;
      row.n = n;
      row.seed = seed;
      const auto pair = detail::stage("generate_graph", [&] { return generate_graph(cfg.graph_drift, cfg.graph_noise, n, seed); });
      row.growth_stat_drift = check_growth_assumption(pair.a);
      row.growth_stat_noise = check_growth_assumption(pair.a_hat);
      if (cfg.has_limit)
        detail::stage("dgm_distance", [&] {
          row.dinf_drift = dgm_distance_inf(dgm_from_matrix(pair.a), *res.limit_drift);
          row.dinf_noise = dgm_distance_inf(dgm_from_matrix(pair.a_hat), *res.limit_noise);
        });
      const auto particles = detail::stage("simulate_particles", [&] {
        return simulate_particles(pair, cs, cfg.initial, grid, seed, cfg.workers);
      });
      if (res.solution) {
        const MeanFieldSolution& sol = *res.solution;
        const auto reps = detail::stage("simulate_representatives", [&] {
          return simulate_representatives(*res.limit_drift, *res.limit_noise, cs, sol, particles, cfg.workers);
        });
        auto report = detail::stage("coupling_error", [&] { return coupling_error(particles, reps); });
        const auto constants =
            theoretical_constants(cs.bounds, dgm_norm(*res.limit_drift), dgm_norm(*res.limit_noise), cfg.t_final,
                                  std::max(row.growth_stat_drift, row.growth_stat_noise));
        report.bound = coupling_bound(constants, cs.bounds, n, 0.0, row.dinf_drift, row.dinf_noise);
        row.coupling_mean = report.mean;
        row.coupling_bound = report.bound;

        detail::stage("w2_checkpoints", [&] {
          const CoupledPairs cp(particles, reps);
          for (std::size_t idx = 0; idx < checkpoint_steps.size(); ++idx) {
            const std::size_t k = checkpoint_steps[idx];
            CheckpointRow c;
            c.t = cfg.checkpoints[idx];
            if (cfg.dimension == 1) c.w2_pooled = wasserstein2_1d(empirical_measure(particles, k), barmu(sol, k));
            CouplingReport upto;
            upto.per_particle_sup_sq.resize(n);
            for (std::size_t i = 0; i < n; ++i) upto.per_particle_sup_sq[i] = cp.sup_sq(i, k);
            const auto cells = coupling_per_cell(upto, particles.labels, sol.u_grid);
            c.w2_wn2 = wn_aggregate(cells, WnMode::l2);
            c.w2_wninf = wn_aggregate(cells, WnMode::inf);
            row.checkpoints.push_back(c);
          }
          if (cfg.dimension == 1)
            row.w2_pooled_T = wasserstein2_1d(empirical_measure(particles, grid.steps), barmu(sol, grid.steps));
          const auto cells = coupling_per_cell(report, particles.labels, sol.u_grid);
          row.w2_wn2_T = wn_aggregate(cells, WnMode::l2);
          row.w2_wninf_T = wn_aggregate(cells, WnMode::inf);
        });
      }
      row.runtime_s = detail::seconds_since(t0);
      if (opt.progress) opt.progress("N=" + std::to_string(n) + " seed=" + std::to_string(seed) + " done");
      res.rows.push_back(std::move(row));
    }
  if (res.solution) res.slope = coupling_slope(res.rows);
  return res;
}

inline CsvTable convergence_table(const StudyResult& res) {
  CsvTable t({"N", "seed", "dinf_drift", "dinf_noise", "growth_stat_drift", "growth_stat_noise", "coupling_mean",
              "coupling_bound", "w2_pooled_T", "w2_wn2_T", "w2_wninf_T", "runtime_s"});
  for (const auto& r : res.rows)
    t.add({std::to_string(r.n), std::to_string(r.seed), fmt(r.dinf_drift), fmt(r.dinf_noise),
           fmt(r.growth_stat_drift), fmt(r.growth_stat_noise), fmt(r.coupling_mean), fmt(r.coupling_bound),
           fmt(r.w2_pooled_T), fmt(r.w2_wn2_T), fmt(r.w2_wninf_T), fmt(r.runtime_s)});
  // Summary row: least-squares log-log slope of the per-N seed means.
  t.add({"slope", "", "", "", "", "", fmt(res.slope), "", "", "", "", ""});
  return t;
}

inline CsvTable checkpoint_table(const StudyResult& res) {
  CsvTable t({"N", "seed", "t", "w2_pooled", "w2_wn2", "w2_wninf"});
  for (const auto& r : res.rows)
    for (const auto& c : r.checkpoints)
      t.add({std::to_string(r.n), std::to_string(r.seed), fmt(c.t), fmt(c.w2_pooled), fmt(c.w2_wn2), fmt(c.w2_wninf)});
  return t;
}

inline CsvTable iteration_table(const MeanFieldSolution& sol) {
  CsvTable t({"iterate", "distance", "wallclock_seconds"});
  for (const auto& r : sol.iteration_log) t.add({std::to_string(r.iterate), fmt(r.distance), fmt(r.wallclock_seconds)});
  return t;
}

// ---------------------------------------------------------------------------
// Checks evaluated on output data

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckThresholds {
  std::optional<double> max_slope, min_slope, pde_gap_tol;
  double tol = 0.0;
};

// Checks on a convergence table (as written to disk).
inline std::vector<Check> sweep_checks(const CsvTable& conv, const CheckThresholds& th) {
  std::vector<Check> out;
  const auto cm = conv.column("coupling_mean"), cb = conv.column("coupling_bound");
  const auto w2 = conv.column("w2_wn2_T"), wi = conv.column("w2_wninf_T");
  bool below = true, ordered = true, any = false;
  std::string slope_text;
  for (const auto& r : conv.rows()) {
    if (r[0] == "slope") {
      slope_text = r[cm];
      continue;
    }
    if (r[cm] == "nan") continue;
    any = true;
    below = below && std::stod(r[cm]) < std::stod(r[cb]);
    ordered = ordered && std::stod(r[w2]) <= std::stod(r[wi]);
  }
  if (!any) return out;
  out.push_back({"coupling_below_bound", below, "coupling_mean < coupling_bound on every run"});
  out.push_back({"wn2_le_wninf", ordered, "W^{N,2} <= W^{N,inf} on every run"});
  const double slope = slope_text.empty() || slope_text == "nan" ? kNaN : std::stod(slope_text);
  if (th.max_slope)
    out.push_back({"slope_max", slope <= *th.max_slope, "slope " + fmt(slope) + " <= " + fmt(*th.max_slope)});
  if (th.min_slope)
    out.push_back({"slope_min", slope >= *th.min_slope, "slope " + fmt(slope) + " >= " + fmt(*th.min_slope)});
  return out;
}

inline std::vector<Check> iteration_checks(const CsvTable& log, const CheckThresholds& th) {
  if (log.rows().empty()) return {};
  const double last = std::stod(log.rows().back()[log.column("distance")]);
  return {{"meanfield_converged", last < th.tol, "last Picard distance " + fmt(last) + " < tol " + fmt(th.tol)}};
}

inline std::vector<Check> pde_checks(const CsvTable& masses, const CsvTable* compare, const CheckThresholds& th) {
  std::vector<Check> out;
  double drift = 0.0;
  const auto mc = masses.column("mass");
  for (const auto& r : masses.rows()) drift = std::max(drift, std::abs(std::stod(r[mc]) - 1.0));
  out.push_back({"pde_mass_conservation", drift <= 1e-10, "max |mass - 1| = " + fmt(drift)});
  if (compare && th.pde_gap_tol) {
    bool ok = true;
    const auto g = compare->column("gap"), se = compare->column("mc_stderr");
    for (const auto& r : compare->rows()) ok = ok && std::stod(r[g]) <= 3.0 * std::stod(r[se]) + *th.pde_gap_tol;
    out.push_back({"pde_vs_mc", ok, "every gap <= 3 stderr + " + fmt(*th.pde_gap_tol)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest and scenario execution

struct RunManifest {
  std::string name;
  std::string command;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::uint64_t meanfield_seed = 0;
  double wallclock_seconds = 0.0;
  std::vector<std::string> outputs;
  std::map<std::string, std::vector<std::string>> schema;
  std::vector<Check> checks;
  bool failed = false;
  std::string failed_stage_error;
  CheckThresholds thresholds;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !failed;
  }

  Json to_json() const {
    Json j;
    j["name"] = name;
    j["command"] = command;
    j["status"] = failed ? "FAILED" : "ok";
    if (failed) j["error"] = failed_stage_error;
    j["config_hash"] = config_hash;
    j["versions"] = {{"dgmlab", DGMLAB_VERSION},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
    j["seeds"] = seeds;
    j["meanfield_seed"] = meanfield_seed;
    j["wallclock_seconds"] = wallclock_seconds;
    j["outputs"] = outputs;
    j["schema"] = schema;
    Json th;
    th["tol"] = thresholds.tol;
    if (thresholds.max_slope) th["max_slope"] = *thresholds.max_slope;
    if (thresholds.min_slope) th["min_slope"] = *thresholds.min_slope;
    if (thresholds.pde_gap_tol) th["pde_gap_tol"] = *thresholds.pde_gap_tol;
    j["thresholds"] = th;
    Json cj = Json::array();
    for (const auto& c : checks) cj.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["checks"] = cj;
    return j;
  }

  void save(const std::filesystem::path& dir) const {
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    if (!f) throw RuntimeFailure("cannot write manifest in " + dir.string());
    f << to_json().dump(2) << '\n';
  }
};

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct RunOptions {
  bool sweep_only = false;  // the `sweep` verb: no PDE stage, needs >= 3 sizes
  std::optional<std::string> output_dir;
  std::function<void(const std::string&)> progress;
};

// Executes a scenario and writes CSVs plus manifest.json into the output
// directory. Stage failures leave a FAILED manifest next to whatever was
// already written, then propagate.
inline RunManifest run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path dir = opt.output_dir ? *opt.output_dir : cfg.outputs;
  std::filesystem::create_directories(dir);

  RunManifest man;
  man.name = cfg.name;
  man.command = opt.sweep_only ? "sweep" : "run";
  man.config_hash = "fnv1a64:" + hex64(fnv1a(cfg.source_text));
  man.seeds = cfg.seeds;
  man.meanfield_seed = cfg.meanfield_seed();
  man.thresholds = {cfg.acceptance.max_slope, cfg.acceptance.min_slope, cfg.acceptance.pde_gap_tol, cfg.meanfield.tol};

  auto save_table = [&](const std::string& file, const CsvTable& t) {
    t.save((dir / file).string());
    man.outputs.push_back(file);
    man.schema[file] = t.header();
  };

  try {
    StudyOptions so;
    so.require_three_sizes = opt.sweep_only;
    so.progress = opt.progress;
    const StudyResult res = convergence_study(cfg, so);
    const CsvTable conv = convergence_table(res);
    save_table("convergence.csv", conv);
    if (res.solution) {
      save_table("checkpoints.csv", checkpoint_table(res));
      const CsvTable log = iteration_table(*res.solution);
      save_table("iteration_log.csv", log);
      auto c1 = sweep_checks(conv, man.thresholds);
      auto c2 = iteration_checks(log, man.thresholds);
      man.checks.insert(man.checks.end(), c1.begin(), c1.end());
      man.checks.insert(man.checks.end(), c2.begin(), c2.end());
      if (cfg.dimension == 1) {
        CsvTable cont({"u_left", "u_right", "w2_T"});
        const auto w = adjacent_law_w2(*res.solution, res.solution->grid.steps);
        for (std::size_t q = 0; q < w.size(); ++q)
          cont.add({fmt(res.solution->u_grid[q]), fmt(res.solution->u_grid[q + 1]), fmt(w[q])});
        save_table("law_continuity.csv", cont);
      }
    }

    if (!opt.sweep_only && cfg.pde && res.solution) {
      detail::stage("solve_vfp", [&] {
        const MeanFieldSolution& sol = *res.solution;
        const SpatialGrid xg(cfg.pde->x_min, cfg.pde->x_max, cfg.pde->cells);
        std::vector<std::vector<double>> rho0;
        for (double u : sol.u_grid) rho0.push_back(initial_density(cfg.initial, u, xg));
        const auto cs = build_coefficients(cfg.drift, cfg.interaction, cfg.noise, cfg.dimension, cfg.box_radius);
        VfpOptions vo;
        vo.workers = cfg.workers;
        const auto field = solve_vfp(*res.limit_drift, *res.limit_noise, cs, rho0, xg, sol.u_grid, sol.grid, vo);

        CsvTable masses({"u", "t", "mass", "boundary_mass"});
        std::vector<std::size_t> steps{0};
        for (double t : cfg.checkpoints) steps.push_back(field.tg.index_of(t));
        for (std::size_t q = 0; q < sol.u_grid.size(); ++q)
          for (std::size_t k = 0; k <= field.tg.steps; ++k)
            masses.add({fmt(sol.u_grid[q]), fmt(field.tg.time(k)), fmt(mass(field, q, k)),
                        fmt(boundary_mass(field, q, k))});
        save_table("pde_mass.csv", masses);

        const auto cmp = compare_to_mc(field, sol, {monomial(1), monomial(2)}, cfg.checkpoints);
        CsvTable ct({"u", "test", "t", "pde", "mc", "gap", "mc_stderr"});
        for (const auto& e : cmp.entries)
          ct.add({fmt(sol.u_grid[e.u_index]), e.test, fmt(e.t), fmt(e.pde), fmt(e.mc), fmt(e.gap), fmt(e.mc_stderr)});
        save_table("pde_compare.csv", ct);

        std::ofstream dens(dir / "density.csv", std::ios::binary);
        write_density_csv(dens, field, steps);
        man.outputs.push_back("density.csv");
        man.schema["density.csv"] = {"u", "t", "x", "rho"};
        auto c3 = pde_checks(masses, &ct, man.thresholds);
        man.checks.insert(man.checks.end(), c3.begin(), c3.end());
      });
    }
  } catch (const std::exception& e) {
    man.failed = true;
    man.failed_stage_error = e.what();
    man.wallclock_seconds = detail::seconds_since(t0);
    man.save(dir);
    throw;
  }
  man.wallclock_seconds = detail::seconds_since(t0);
  man.save(dir);
  return man;
}

// ---------------------------------------------------------------------------
// Reports

inline const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Log-log convergence plots from convergence.csv (matplotlib)."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = [r for r in csv.DictReader(open(os.path.join(here, "convergence.csv"))) if r["N"] != "slope"]
if not rows:
    sys.exit("no sweep rows")


def seed_means(column):
    acc = defaultdict(list)
    for r in rows:
        value = float(r[column])
        if value == value:
            acc[int(r["N"])].append(value)
    ns = sorted(acc)
    return ns, [sum(acc[n]) / len(acc[n]) for n in ns]


fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for column in ("coupling_mean", "w2_pooled_T", "w2_wninf_T"):
    ns, ys = seed_means(column)
    if ns:
        axes[0].loglog(ns, ys, "o-", label=column)
ns, ys = seed_means("coupling_mean")
if ns:
    axes[0].loglog(ns, [ys[0] * ns[0] / n for n in ns], "k--", label="1/N")
axes[0].set_xlabel("N")
axes[0].legend()
for column in ("dinf_drift", "dinf_noise"):
    ns, ys = seed_means(column)
    if ns:
        axes[1].loglog(ns, ys, "o-", label=column)
axes[1].set_xlabel("N")
axes[1].legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "convergence.png"), dpi=120)
)PY";

// Writes summary.txt and plot_convergence.py into a results directory and
// returns the checks it found. Checks are recomputed from the CSVs.
inline std::vector<Check> emit_report(const std::string& results_dir) {
  const std::filesystem::path dir(results_dir);
  const auto mpath = dir / "manifest.json";
  if (!std::filesystem::exists(mpath)) throw RuntimeFailure("report: no manifest.json in " + results_dir);
  Json man;
  try {
    std::ifstream in(mpath);
    man = Json::parse(in);
  } catch (const Json::exception& e) {
    throw RuntimeFailure(std::string("report: unreadable manifest: ") + e.what());
  }
  CheckThresholds th;
  const Json thj = man.value("thresholds", Json::object());
  th.tol = thj.value("tol", 0.0);
  if (thj.contains("max_slope")) th.max_slope = thj.at("max_slope").get<double>();
  if (thj.contains("min_slope")) th.min_slope = thj.at("min_slope").get<double>();
  if (thj.contains("pde_gap_tol")) th.pde_gap_tol = thj.at("pde_gap_tol").get<double>();

  std::vector<Check> checks;
  std::ostringstream s;
  s << "scenario: " << man.value("name", "?") << '\n';
  s << "command: " << man.value("command", "?") << '\n';
  s << "status: " << man.value("status", "?") << '\n';
  s << "config_hash: " << man.value("config_hash", "?") << '\n';
  if (man.value("status", "") == "FAILED") {
    s << "error: " << man.value("error", "") << '\n';
    checks.push_back({"run_completed", false, man.value("error", "")});
  }

  auto add = [&](std::vector<Check> cs) { checks.insert(checks.end(), cs.begin(), cs.end()); };
  if (std::filesystem::exists(dir / "convergence.csv")) {
    const auto conv = CsvTable::load((dir / "convergence.csv").string());
    s << "\nconvergence.csv (" << conv.rows().size() << " rows)\n";
    const auto cm = conv.column("coupling_mean"), di = conv.column("dinf_drift");
    for (const auto& r : conv.rows()) {
      if (r[0] == "slope")
        s << "  fitted log-log slope of coupling_mean vs N: " << r[cm] << '\n';
      else
        s << "  N=" << r[0] << " seed=" << r[1] << " dinf_drift=" << r[di] << " coupling_mean=" << r[cm] << '\n';
    }
    add(sweep_checks(conv, th));
  }
  if (std::filesystem::exists(dir / "iteration_log.csv"))
    add(iteration_checks(CsvTable::load((dir / "iteration_log.csv").string()), th));
  if (std::filesystem::exists(dir / "pde_mass.csv")) {
    const auto masses = CsvTable::load((dir / "pde_mass.csv").string());
    std::optional<CsvTable> cmp;
    if (std::filesystem::exists(dir / "pde_compare.csv")) cmp = CsvTable::load((dir / "pde_compare.csv").string());
    add(pde_checks(masses, cmp ? &*cmp : nullptr, th));
  }

  s << "\nchecks\n";
  for (const auto& c : checks) s << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.detail << '\n';
  if (checks.empty()) s << "  (no checks found in the data)\n";

  {
    std::ofstream f(dir / "summary.txt", std::ios::binary);
    if (!f) throw RuntimeFailure("report: cannot write summary.txt");
    f << s.str();
  }
  {
    std::ofstream f(dir / "plot_convergence.py", std::ios::binary);
    if (!f) throw RuntimeFailure("report: cannot write plot_convergence.py");
    f << kPlotScript;
  }
  return checks;
}

// Drops wallclock columns so runs can be compared byte for byte.
inline std::string numeric_content(const CsvTable& t) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < t.header().size(); ++i)
    if (!is_wallclock_column(t.header()[i])) keep.push_back(i);
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t k = 0; k < keep.size(); ++k) out += (k ? "," : "") + r[keep[k]];
    out += '\n';
  };
  emit(t.header());
  for (const auto& r : t.rows()) emit(r);
  return out;
}

}  // namespace dgmlab
