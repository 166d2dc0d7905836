#pragma once

// Scenario configuration files (JSON).
//
//   {
//     "name": "complete_linear",
//     "dimension": 1,
//     "dynamics": {
//       "drift":       {"family": "linear", "rate": -1.0},
//       "interaction": {"family": "linear", "k": 1.0},
//       "noise":       {"family": "constant", "sigma": 0.5},
//       "box_radius":  5.0
//     },
//     "graph": {"drift": {"family": "complete"}, "noise": {"family": "complete"}},
//     "limit_dgm": "graph",                  // "graph", "none", or {"drift": ..., "noise": ...}
//     "limit_grid": 256,
//     "initial": {"family": "gaussian", "mean": 1.0, "variance": 0.5},
//     "time": {"T": 1.0, "steps": 200},
//     "meanfield": {"u_points": 4, "M": 1000, "tol": 1e-3, "max_iter": 20, "seed": 1},
//     "pde": {"x_min": -4.0, "x_max": 4.0, "cells": 400},
//     "sweep": [32, 64, 128],
//     "seeds": [1, 2],
//     "outputs": "results/complete_linear",
//     "workers": 1,
//     "acceptance": {"max_slope": -0.4}
//   }
//
// Graph objects: {"family": "complete"}, {"family": "ring", "k": 2} or
// {"family": "ring", "k_divisor": 8, "c": 2}, {"family": "graphon_weighted",
// "kernel": "exponential", "param": 0.5}, {"family": "erdos_renyi", "p": 0.3},
// {"family": "explicit", "path": "graph.txt"}. Relative paths resolve against
// the config file's directory.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgmlab/coefficients.hpp"
#include "dgmlab/error.hpp"
#include "dgmlab/graphs.hpp"

namespace dgmlab {

using Json = nlohmann::json;

struct PdeConfig {
  double x_min = -4.0, x_max = 4.0;
  std::size_t cells = 400;
};

struct MeanFieldConfig {
  std::size_t u_points = 4;
  std::size_t samples = 1000;
  double tol = 1e-3;
  std::size_t max_iter = 20;
  std::optional<std::uint64_t> seed;
};

struct AcceptanceConfig {
  std::optional<double> max_slope;
  std::optional<double> min_slope;
  std::optional<double> pde_gap_tol;
};

struct ScenarioConfig {
  std::string name;
  std::size_t dimension = 1;
  FamilySpec drift, interaction, noise;
  double box_radius = 10.0;
  GraphSpec graph_drift, graph_noise;
  bool has_limit = false;
  GraphSpec limit_drift, limit_noise;
  std::size_t limit_grid = 256;
  InitialLaw initial;
  double t_final = 1.0;
  std::size_t steps = 100;
  MeanFieldConfig meanfield;
  std::optional<PdeConfig> pde;
  std::vector<std::size_t> sweep;
  std::vector<std::uint64_t> seeds;
  std::string outputs;
  std::size_t workers = 1;
  std::vector<double> checkpoints;
  AcceptanceConfig acceptance;
  std::string source_text;  // raw file bytes, hashed into the manifest

  std::uint64_t meanfield_seed() const { return meanfield.seed ? *meanfield.seed : seeds.front(); }
};

namespace detail {

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  require(j.is_object(), where + ": expected an object");
  for (const auto& [key, value] : j.items())
    require(allowed.count(key) == 1, where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ValidationError(where + ": key '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_req(const Json& j, const char* key, const std::string& where) {
  require(j.contains(key), where + ": missing key '" + key + "'");
  return get_or<T>(j, key, T{}, where);
}

inline std::size_t get_count(const Json& j, const char* key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  require(v.is_number_integer() && v.get<long long>() >= 0, where + ": '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline FamilySpec parse_family(const Json& j, const std::string& where) {
  require(j.is_object(), where + ": expected an object");
  FamilySpec f;
  f.name = get_req<std::string>(j, "family", where);
  for (const auto& [key, value] : j.items()) {
    if (key == "family") continue;
    require(value.is_number(), where + ": parameter '" + key + "' must be a number");
    f.params[key] = value.get<double>();
  }
  return f;
}

inline GraphSpec parse_graph(const Json& j, const std::string& where, const std::filesystem::path& base) {
  check_keys(j, {"family", "k", "k_divisor", "c", "kernel", "param", "p", "distinct_noise", "path"}, where);
  GraphSpec g;
  g.family = parse_graph_family(get_req<std::string>(j, "family", where));
  g.ring_k = get_count(j, "k", 1, where);
  g.ring_k_divisor = get_or<double>(j, "k_divisor", 0.0, where);
  g.ring_c = get_or<double>(j, "c", 2.0, where);
  g.kernel.name = get_or<std::string>(j, "kernel", "constant", where);
  g.kernel.param = get_or<double>(j, "param", 1.0, where);
  g.p = get_or<double>(j, "p", 0.5, where);
  g.distinct_noise = get_or<bool>(j, "distinct_noise", false, where);
  if (g.family == GraphFamily::explicit_matrix) {
    std::filesystem::path p = get_req<std::string>(j, "path", where);
    if (p.is_relative()) p = base / p;
    auto [a, a_hat] = read_matrix_pair(p.string());
    g.explicit_a = std::move(a);
    g.explicit_a_hat = std::move(a_hat);
  }
  g.validate();
  return g;
}

inline InitialLaw parse_initial(const Json& j) {
  const std::string where = "initial";
  check_keys(j, {"family", "x0", "a", "b", "mean", "variance", "alpha"}, where);
  InitialLaw law;
  law.family = parse_initial_family(get_req<std::string>(j, "family", where));
  law.x0 = get_or<double>(j, "x0", 0.0, where);
  law.a = get_or<double>(j, "a", 0.0, where);
  law.b = get_or<double>(j, "b", 1.0, where);
  law.mean = get_or<double>(j, "mean", 0.0, where);
  law.variance = get_or<double>(j, "variance", 1.0, where);
  law.alpha = get_or<double>(j, "alpha", 0.0, where);
  law.validate();
  return law;
}

}  // namespace detail

inline ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base = ".") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  detail::check_keys(j,
                     {"name", "dimension", "dynamics", "graph", "limit_dgm", "limit_grid", "initial", "time",
                      "meanfield", "pde", "sweep", "seeds", "outputs", "workers", "checkpoints", "acceptance"},
                     "config");
  ScenarioConfig c;
  c.source_text = text;
  c.name = detail::get_req<std::string>(j, "name", "config");
  c.dimension = detail::get_count(j, "dimension", 1, "config");
  require(c.dimension >= 1, "config: dimension must be >= 1");

  require(j.contains("dynamics"), "config: missing key 'dynamics'");
  const auto& dyn = j.at("dynamics");
  detail::check_keys(dyn, {"drift", "interaction", "noise", "box_radius"}, "dynamics");
  c.drift = detail::parse_family(dyn.value("drift", Json{{"family", "zero"}}), "dynamics.drift");
  c.interaction = detail::parse_family(dyn.value("interaction", Json{{"family", "zero"}}), "dynamics.interaction");
  c.noise = detail::parse_family(dyn.value("noise", Json{{"family", "zero"}}), "dynamics.noise");
  c.box_radius = detail::get_or<double>(dyn, "box_radius", 10.0, "dynamics");

  require(j.contains("graph"), "config: missing key 'graph'");
  const auto& gr = j.at("graph");
  detail::check_keys(gr, {"drift", "noise"}, "graph");
  require(gr.contains("drift"), "graph: missing key 'drift'");
  c.graph_drift = detail::parse_graph(gr.at("drift"), "graph.drift", base);
  c.graph_noise = gr.contains("noise") ? detail::parse_graph(gr.at("noise"), "graph.noise", base) : c.graph_drift;

  const Json limit = j.value("limit_dgm", Json("graph"));
  if (limit.is_string()) {
    const auto s = limit.get<std::string>();
    require(s == "graph" || s == "none", "limit_dgm: expected \"graph\", \"none\" or an object");
    c.has_limit = s == "graph";
    c.limit_drift = c.graph_drift;
    c.limit_noise = c.graph_noise;
  } else {
    detail::check_keys(limit, {"drift", "noise"}, "limit_dgm");
    require(limit.contains("drift"), "limit_dgm: missing key 'drift'");
    c.has_limit = true;
    c.limit_drift = detail::parse_graph(limit.at("drift"), "limit_dgm.drift", base);
    c.limit_noise = limit.contains("noise") ? detail::parse_graph(limit.at("noise"), "limit_dgm.noise", base)
                                            : c.limit_drift;
  }
  if (c.has_limit)
    require(c.limit_drift.family != GraphFamily::explicit_matrix &&
                c.limit_noise.family != GraphFamily::explicit_matrix,
            "limit_dgm: explicit matrices have no known limit; set \"limit_dgm\": \"none\"");
  c.limit_grid = detail::get_count(j, "limit_grid", 256, "config");
  require(c.limit_grid >= 1, "config: limit_grid must be >= 1");

  require(j.contains("initial"), "config: missing key 'initial'");
  c.initial = detail::parse_initial(j.at("initial"));

  require(j.contains("time"), "config: missing key 'time'");
  const auto& tm = j.at("time");
  detail::check_keys(tm, {"T", "steps"}, "time");
  c.t_final = detail::get_req<double>(tm, "T", "time");
  c.steps = detail::get_count(tm, "steps", 0, "time");
  require(std::isfinite(c.t_final) && c.t_final > 0.0, "time: T must be > 0");
  require(c.steps >= 1, "time: steps must be >= 1");

  if (j.contains("meanfield")) {
    const auto& mf = j.at("meanfield");
    detail::check_keys(mf, {"u_points", "M", "tol", "max_iter", "seed"}, "meanfield");
    c.meanfield.u_points = detail::get_count(mf, "u_points", 4, "meanfield");
    c.meanfield.samples = detail::get_count(mf, "M", 1000, "meanfield");
    c.meanfield.tol = detail::get_or<double>(mf, "tol", 1e-3, "meanfield");
    c.meanfield.max_iter = detail::get_count(mf, "max_iter", 20, "meanfield");
    if (mf.contains("seed")) c.meanfield.seed = detail::get_count(mf, "seed", 0, "meanfield");
  }
  require(c.meanfield.u_points >= 1, "meanfield: u_points must be >= 1");
  require(c.meanfield.samples >= 2, "meanfield: M must be >= 2");
  require(c.meanfield.tol > 0.0, "meanfield: tol must be > 0");
  require(c.meanfield.max_iter >= 1, "meanfield: max_iter must be >= 1");

  if (j.contains("pde")) {
    const auto& p = j.at("pde");
    detail::check_keys(p, {"x_min", "x_max", "cells"}, "pde");
    PdeConfig pc;
    pc.x_min = detail::get_req<double>(p, "x_min", "pde");
    pc.x_max = detail::get_req<double>(p, "x_max", "pde");
    pc.cells = detail::get_count(p, "cells", 400, "pde");
    require(pc.x_min < pc.x_max && pc.cells >= 4, "pde: need x_min < x_max and cells >= 4");
    require(c.dimension == 1, "pde: the density solver needs dimension 1");
    c.pde = pc;
  }

  require(j.contains("sweep") && j.at("sweep").is_array() && !j.at("sweep").empty(),
          "config: 'sweep' must be a nonempty list of N values");
  for (const auto& v : j.at("sweep")) {
    require(v.is_number_integer() && v.get<long long>() >= 1, "sweep: N values must be positive integers");
    c.sweep.push_back(v.get<std::size_t>());
  }
  require(j.contains("seeds") && j.at("seeds").is_array() && !j.at("seeds").empty(),
          "config: 'seeds' must be a nonempty list");
  for (const auto& v : j.at("seeds")) {
    require(v.is_number_integer() && v.get<long long>() >= 0, "seeds: values must be nonnegative integers");
    c.seeds.push_back(v.get<std::uint64_t>());
  }
  c.outputs = detail::get_or<std::string>(j, "outputs", "results/" + c.name, "config");
  c.workers = detail::get_count(j, "workers", 1, "config");
  require(c.workers >= 1, "config: workers must be >= 1");

  if (j.contains("checkpoints")) {
    require(j.at("checkpoints").is_array(), "checkpoints: expected a list of times");
    for (const auto& v : j.at("checkpoints")) {
      require(v.is_number(), "checkpoints: times must be numbers");
      const double t = v.get<double>();
      require(t > 0.0 && t <= c.t_final, "checkpoints: times must lie in (0, T]");
      c.checkpoints.push_back(t);
    }
  } else {
    c.checkpoints = {0.25 * c.t_final, 0.5 * c.t_final, 0.75 * c.t_final, c.t_final};
  }

  if (j.contains("acceptance")) {
    const auto& a = j.at("acceptance");
    detail::check_keys(a, {"max_slope", "min_slope", "pde_gap_tol"}, "acceptance");
    if (a.contains("max_slope")) c.acceptance.max_slope = detail::get_or<double>(a, "max_slope", 0.0, "acceptance");
    if (a.contains("min_slope")) c.acceptance.min_slope = detail::get_or<double>(a, "min_slope", 0.0, "acceptance");
    if (a.contains("pde_gap_tol"))
      c.acceptance.pde_gap_tol = detail::get_or<double>(a, "pde_gap_tol", 0.0, "acceptance");
  }

  // Families must resolve.
  (void)build_coefficients(c.drift, c.interaction, c.noise, c.dimension, c.box_radius);
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path());
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace dgmlab
