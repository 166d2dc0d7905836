#pragma once

// Wasserstein and bounded-Lipschitz distances between empirical measures,
// and running-sup distances between coupled path ensembles.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dgmlab/bl_distance.hpp"
#include "dgmlab/empirical.hpp"
#include "dgmlab/error.hpp"
#include "dgmlab/lp.hpp"
#include "dgmlab/particle_sim.hpp"

namespace dgmlab {

namespace detail {

inline void require_equal_mass(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const char* who) {
  require(std::abs(mu.total_weight() - nu.total_weight()) <= 1e-12, std::string(who) + ": unequal total mass");
  require(mu.dim() == nu.dim(), std::string(who) + ": dimension mismatch");
}

inline double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t c = 0; c < d; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return s;
}

}  // namespace detail

// Exact W2 on the line by the quantile coupling.
inline double wasserstein2_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  detail::require_equal_mass(mu, nu, "wasserstein2_1d");
  require(mu.dim() == 1, "wasserstein2_1d: measures must be one-dimensional");
  auto sorted = [](const EmpiricalMeasure& m) {
    std::vector<std::pair<double, double>> a(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) a[i] = {m.point(i)[0], m.weight(i)};
    std::sort(a.begin(), a.end());
    return a;
  };
  const auto a = sorted(mu), b = sorted(nu);
  std::size_t i = 0, j = 0;
  double ra = a.empty() ? 0.0 : a[0].second, rb = b.empty() ? 0.0 : b[0].second;
  double cost = 0.0;
  while (i < a.size() && j < b.size()) {
    const double moved = std::min(ra, rb);
    const double gap = a[i].first - b[j].first;
    cost += moved * gap * gap;
    ra -= moved;
    rb -= moved;
    if (ra <= 0.0 && ++i < a.size()) ra = a[i].second;
    if (rb <= 0.0 && ++j < b.size()) rb = b[j].second;
  }
  return std::sqrt(std::max(0.0, cost));
}

inline constexpr std::size_t kW2OracleMaxAtoms = 32;

// Transport LP with squared Euclidean cost. Capacities are upper bounds and
// the objective rewards moved mass (K - c_ij with K above every cost), so an
// optimum ships all mass.
inline double wasserstein2_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  detail::require_equal_mass(mu, nu, "wasserstein2_lp");
  const std::size_t m = mu.size(), n = nu.size(), d = mu.dim();
  if (m > kW2OracleMaxAtoms || n > kW2OracleMaxAtoms)
    throw UnsupportedError("wasserstein2_lp: at most 32 atoms per side");
  std::vector<double> cost(m * n);
  double cmax = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = detail::sq_dist(mu.point(i), nu.point(j), d);
      cmax = std::max(cmax, cost[i * n + j]);
    }
  const double big = cmax + 1.0;
  const std::size_t vars = m * n, rows = m + n;
  std::vector<double> a(rows * vars, 0.0), b(rows), c(vars);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i * vars + i * n + j] = 1.0;
      a[(m + j) * vars + i * n + j] = 1.0;
    }
    b[i] = mu.weight(i);
  }
  for (std::size_t j = 0; j < n; ++j) b[m + j] = nu.weight(j);
  for (std::size_t k = 0; k < vars; ++k) c[k] = big - cost[k];
  const auto res = solve_lp(rows, vars, a, b, c);
  if (res.status != LpStatus::optimal) throw RuntimeFailure("wasserstein2_lp: LP not optimal");
  double shipped = 0.0, total = 0.0;
  for (std::size_t k = 0; k < vars; ++k) {
    shipped += res.x[k];
    total += res.x[k] * cost[k];
  }
  if (std::abs(shipped - mu.total_weight()) > 1e-9) throw RuntimeFailure("wasserstein2_lp: mass not fully shipped");
  return std::sqrt(std::max(0.0, total));
}

inline constexpr std::size_t kBlRdMaxAtoms = 64;

// BL distance in R^d: joint LP in (f, L) over the union of atoms with
// Euclidean pairwise Lipschitz constraints.
inline double bl_distance_rd(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require(mu.dim() == nu.dim(), "bl_distance_rd: dimension mismatch");
  if (mu.size() > kBlRdMaxAtoms || nu.size() > kBlRdMaxAtoms)
    throw UnsupportedError("bl_distance_rd: at most 64 atoms per side");
  const std::size_t d = mu.dim();
  std::map<std::vector<double>, double> charge;
  for (std::size_t i = 0; i < mu.size(); ++i)
    charge[std::vector<double>(mu.point(i), mu.point(i) + d)] += mu.weight(i);
  for (std::size_t i = 0; i < nu.size(); ++i)
    charge[std::vector<double>(nu.point(i), nu.point(i) + d)] -= nu.weight(i);
  std::vector<std::vector<double>> pts;
  std::vector<double> c;
  for (const auto& [p, w] : charge)
    if (w != 0.0) {
      pts.push_back(p);
      c.push_back(w);
    }
  if (c.empty()) return 0.0;
  const std::size_t count = c.size();
  std::vector<double> dist(count * count);
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t q = 0; q < count; ++q) dist[p * count + q] = std::sqrt(detail::sq_dist(pts[p].data(), pts[q].data(), d));
  return detail::bl_dual_lp(dist, c);
}

// Pairs of paths on a shared time grid.
struct CoupledPairs {
  const PathEnsemble* first = nullptr;
  const PathEnsemble* second = nullptr;

  CoupledPairs(const PathEnsemble& a, const PathEnsemble& b) : first(&a), second(&b) {
    require(a.paths == b.paths, "CoupledPairs: path counts differ");
    require(a.grid == b.grid, "CoupledPairs: time grids differ");
    require(a.d == b.d, "CoupledPairs: dimensions differ");
  }

  // sup_{k <= t_index} |X_m(k) - Y_m(k)|^2 for one pair.
  double sup_sq(std::size_t m, std::size_t t_index) const {
    double best = 0.0;
    for (std::size_t k = 0; k <= t_index; ++k)
      best = std::max(best, detail::sq_dist(first->state(m, k), second->state(m, k), first->d));
    return best;
  }
};

// Mean over pairs of sup_{k <= t_index} |X - Y|^2: an upper bound on
// W_{2,t}^2 under the coupling.
inline double path_sup_distance_sq(const CoupledPairs& cp, std::size_t t_index) {
  require(t_index <= cp.first->grid.steps, "path_sup_distance_sq: t_index out of range");
  require(cp.first->paths >= 1, "path_sup_distance_sq: no pairs");
  double s = 0.0;
  for (std::size_t m = 0; m < cp.first->paths; ++m) s += cp.sup_sq(m, t_index);
  return s / static_cast<double>(cp.first->paths);
}

enum class WnMode { l2, inf };

// Aggregates per-label distances over a uniform label grid.
inline double wn_aggregate(const std::vector<double>& per_u, WnMode mode) {
  require(!per_u.empty(), "wn_aggregate: empty input");
  for (double v : per_u) require(std::isfinite(v) && v >= 0.0, "wn_aggregate: values must be finite and >= 0");
  const double top = *std::max_element(per_u.begin(), per_u.end());
  if (mode == WnMode::inf) return top;
  double s = 0.0;
  for (double v : per_u) s += v * v;
  // Clamp so rounding never lifts the mean above the max.
  return std::min(top, std::sqrt(s / static_cast<double>(per_u.size())));
}

}  // namespace dgmlab
