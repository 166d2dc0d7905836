#pragma once

// Per-label Vlasov-Fokker-Planck system in one space dimension,
//
//   d/dt rho_u + d/dx(a rho_u) = d2/dx2(D rho_u),
//   a(x, u, t) = f(x) + sum_v eta^u(v) int g(x, y) rho_v(y) dy,
//   D(x, u, t) = (1/2) [sum_v etahat^u(v) int h(x, y) rho_v(y) dy]^2,
//
// by explicit finite volumes: upwind advective flux at faces, diffusive flux
// -(D_{i+1} rho_{i+1} - D_i rho_i) / dx, zero flux through both walls.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "dgmlab/coefficients.hpp"
#include "dgmlab/error.hpp"
#include "dgmlab/graphs.hpp"
#include "dgmlab/meanfield.hpp"
#include "dgmlab/parallel.hpp"
#include "dgmlab/particle_sim.hpp"

namespace dgmlab {

struct SpatialGrid {
  double x_min = -1.0, x_max = 1.0;
  std::size_t cells = 4;

  SpatialGrid() = default;
  SpatialGrid(double lo, double hi, std::size_t n) : x_min(lo), x_max(hi), cells(n) { validate(); }

  void validate() const {
    require(std::isfinite(x_min) && std::isfinite(x_max) && x_min < x_max, "SpatialGrid: need x_min < x_max");
    require(cells >= 4, "SpatialGrid: need at least 4 cells");
  }
  double dx() const { return (x_max - x_min) / static_cast<double>(cells); }
  double center(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * dx(); }
  double face(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

struct DensityField {
  SpatialGrid xg;
  TimeGrid tg;
  std::vector<double> u_grid;
  std::vector<double> rho;  // [u][step][cell]
  std::size_t substeps = 0;

  const double* at(std::size_t q, std::size_t k) const { return &rho[(q * (tg.steps + 1) + k) * xg.cells]; }
  double* at(std::size_t q, std::size_t k) { return &rho[(q * (tg.steps + 1) + k) * xg.cells]; }
};

inline double mass(const DensityField& field, std::size_t q, std::size_t k) {
  const double* r = field.at(q, k);
  double s = 0.0;
  for (std::size_t i = 0; i < field.xg.cells; ++i) s += r[i];
  return s * field.xg.dx();
}

inline double moment(const DensityField& field, std::size_t q, std::size_t k, int order) {
  const double* r = field.at(q, k);
  double s = 0.0;
  for (std::size_t i = 0; i < field.xg.cells; ++i) s += std::pow(field.xg.center(i), order) * r[i];
  return s * field.xg.dx();
}

// Mass held by the outermost `width` cells on each side.
inline double boundary_mass(const DensityField& field, std::size_t q, std::size_t k, std::size_t width = 5) {
  const double* r = field.at(q, k);
  const std::size_t n = field.xg.cells, w = std::min(width, n / 2);
  double s = 0.0;
  for (std::size_t i = 0; i < w; ++i) s += r[i] + r[n - 1 - i];
  return s * field.xg.dx();
}

// Cell averages of the one-dimensional initial law at label u, rescaled to
// unit mass on the box. A point law puts all mass in the cell holding x0.
inline std::vector<double> initial_density(const InitialLaw& law, double u, const SpatialGrid& xg) {
  law.validate();
  xg.validate();
  const std::size_t n = xg.cells;
  const double dx = xg.dx();
  std::vector<double> rho(n, 0.0);
  std::function<double(double)> cdf;
  switch (law.family) {
    case InitialFamily::point: {
      require(law.x0 >= xg.x_min && law.x0 <= xg.x_max, "initial_density: point outside the box");
      const auto i = std::min(n - 1, static_cast<std::size_t>((law.x0 - xg.x_min) / dx));
      rho[i] = 1.0 / dx;
      return rho;
    }
    case InitialFamily::uniform:
      cdf = [&](double x) { return std::clamp((x - law.a) / (law.b - law.a), 0.0, 1.0); };
      break;
    case InitialFamily::gaussian:
    case InitialFamily::gaussian_u: {
      const double m = law.mean_at(u), s = std::sqrt(law.variance);
      if (s == 0.0) {
        InitialLaw p;
        p.x0 = m;
        return initial_density(p, u, xg);
      }
      cdf = [m, s](double x) { return 0.5 * std::erfc(-(x - m) / (s * std::sqrt(2.0))); };
      break;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rho[i] = cdf(xg.face(i + 1)) - cdf(xg.face(i));
    total += rho[i];
  }
  require(total > 0.0, "initial_density: law has no mass inside the box");
  for (auto& r : rho) r /= total * dx;
  return rho;
}

struct VfpOptions {
  std::size_t max_substeps = 20'000'000;
  double cfl = 0.9;
  std::size_t workers = 1;
};

namespace detail {

// Trapezoid weights on the cell centers.
inline double trapezoid(const double* v, std::size_t n, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (i == 0 || i + 1 == n ? 0.5 : 1.0) * v[i];
  return s * dx;
}

// Nonlocal pieces of one label's law needed by the coefficient integrals.
struct LawSummary {
  double mass = 0.0;
  double mean = 0.0;
};

class VfpCoefficients {
 public:
  VfpCoefficients(const CoefficientSet& cs, const SpatialGrid& xg, std::vector<std::vector<double>> wd,
                  std::vector<std::vector<double>> wn)
      : cs_(&cs), xg_(xg), wd_(std::move(wd)), wn_(std::move(wn)) {}

  // Refresh summaries from the current densities [u][cell].
  void refresh(const std::vector<double>& rho) {
    const std::size_t U = wd_.size(), n = xg_.cells;
    rho_ = &rho;
    sums_.assign(U, {});
    std::vector<double> xr(n);
    for (std::size_t q = 0; q < U; ++q) {
      const double* r = &rho[q * n];
      for (std::size_t i = 0; i < n; ++i) xr[i] = xg_.center(i) * r[i];
      sums_[q].mass = trapezoid(r, n, xg_.dx());
      sums_[q].mean = sums_[q].mass > 0.0 ? trapezoid(xr.data(), n, xg_.dx()) / sums_[q].mass : 0.0;
    }
  }

  double drift(std::size_t q, double x) const {
    double a;
    cs_->f(&x, &a);
    if (cs_->g_is_zero) return a;
    double y, out;
    for (std::size_t v = 0; v < wd_[q].size(); ++v) {
      const double w = wd_[q][v];
      if (w == 0.0 || sums_[v].mass == 0.0) continue;
      if (cs_->g_dependence == YDependence::general) {
        a += w * integral_g(v, x);
        continue;
      }
      y = cs_->g_dependence == YDependence::affine ? sums_[v].mean : x;
      cs_->g(&x, &y, &out);
      a += w * sums_[v].mass * out;
    }
    return a;
  }

  double diffusion(std::size_t q, double x) const {
    if (cs_->h_is_zero) return 0.0;
    double amp = 0.0;
    for (std::size_t v = 0; v < wn_[q].size(); ++v) {
      const double w = wn_[q][v];
      if (w == 0.0 || sums_[v].mass == 0.0) continue;
      if (cs_->h_dependence == YDependence::general) {
        amp += w * integral_h(v, x);
        continue;
      }
      const double y = cs_->h_dependence == YDependence::affine ? sums_[v].mean : x;
      amp += w * sums_[v].mass * cs_->h(&x, &y);
    }
    return 0.5 * amp * amp;
  }

 private:
  double integral_g(std::size_t v, double x) const {
    const std::size_t n = xg_.cells;
    const double* r = &(*rho_)[v * n];
    double s = 0.0, out;
    for (std::size_t i = 0; i < n; ++i) {
      if (r[i] == 0.0) continue;
      const double y = xg_.center(i);
      cs_->g(&x, &y, &out);
      s += (i == 0 || i + 1 == n ? 0.5 : 1.0) * out * r[i];
    }
    return s * xg_.dx();
  }

  double integral_h(std::size_t v, double x) const {
    const std::size_t n = xg_.cells;
    const double* r = &(*rho_)[v * n];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (r[i] == 0.0) continue;
      const double y = xg_.center(i);
      s += (i == 0 || i + 1 == n ? 0.5 : 1.0) * cs_->h(&x, &y) * r[i];
    }
    return s * xg_.dx();
  }

  const CoefficientSet* cs_;
  SpatialGrid xg_;
  std::vector<std::vector<double>> wd_, wn_;
  const std::vector<double>* rho_ = nullptr;
  std::vector<LawSummary> sums_;
};

}  // namespace detail

inline DensityField solve_vfp(const DigraphMeasure& eta, const DigraphMeasure& eta_hat, const CoefficientSet& cs,
                              const std::vector<std::vector<double>>& rho0, const SpatialGrid& xg,
                              const std::vector<double>& u_grid, const TimeGrid& tg, const VfpOptions& opt = {}) {
  cs.validate();
  xg.validate();
  tg.validate();
  require(cs.d == 1, "solve_vfp: density solver is one-dimensional");
  require(!u_grid.empty() && rho0.size() == u_grid.size(), "solve_vfp: one initial density per label required");
  require(opt.cfl > 0.0 && opt.cfl <= 1.0, "solve_vfp: cfl must lie in (0, 1]");
  const std::size_t U = u_grid.size(), n = xg.cells;
  const double dx = xg.dx();
  for (const auto& r : rho0) {
    require(r.size() == n, "solve_vfp: initial density has the wrong number of cells");
    double m = 0.0;
    for (double v : r) {
      require(std::isfinite(v) && v >= 0.0, "solve_vfp: initial density must be finite and >= 0");
      m += v;
    }
    require(std::abs(m * dx - 1.0) <= 1e-9, "solve_vfp: initial density must have unit mass");
  }

  std::vector<std::vector<double>> wd(U), wn(U);
  for (std::size_t q = 0; q < U; ++q) {
    wd[q] = aggregate_fiber(eta.fiber(u_grid[q]), u_grid);
    wn[q] = aggregate_fiber(eta_hat.fiber(u_grid[q]), u_grid);
  }
  detail::VfpCoefficients coef(cs, xg, std::move(wd), std::move(wn));

  DensityField field;
  field.xg = xg;
  field.tg = tg;
  field.u_grid = u_grid;
  field.rho.assign(U * (tg.steps + 1) * n, 0.0);
  std::vector<double> cur(U * n), next(U * n);
  for (std::size_t q = 0; q < U; ++q) {
    std::copy(rho0[q].begin(), rho0[q].end(), &cur[q * n]);
    std::copy(rho0[q].begin(), rho0[q].end(), field.at(q, 0));
  }

  // Face velocities [u][face 0..n] and cell diffusivities [u][cell].
  std::vector<double> a((n + 1) * U), dcoef(n * U), amax(U), dmax(U);
  const double dt_out = tg.dt();
  for (std::size_t k = 0; k < tg.steps; ++k) {
    double remaining = dt_out;
    while (remaining > 0.0) {
      coef.refresh(cur);
      parallel_for(U, opt.workers, [&](std::size_t q) {
        double* aq = &a[q * (n + 1)];
        double* dq = &dcoef[q * n];
        aq[0] = aq[n] = 0.0;
        double am = 0.0, dm = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
          aq[i] = coef.drift(q, xg.face(i));
          am = std::max(am, std::abs(aq[i]));
        }
        for (std::size_t i = 0; i < n; ++i) {
          dq[i] = coef.diffusion(q, xg.center(i));
          dm = std::max(dm, dq[i]);
        }
        amax[q] = am;
        dmax[q] = dm;
      });
      const double am = *std::max_element(amax.begin(), amax.end());
      const double dm = *std::max_element(dmax.begin(), dmax.end());
      if (!std::isfinite(am) || !std::isfinite(dm))
        throw RuntimeFailure("solve_vfp: non-finite coefficient at step " + std::to_string(k));
      const double rate = 2.0 * am / dx + 2.0 * dm / (dx * dx);
      const double limit = rate > 0.0 ? opt.cfl / rate : remaining;
      if (remaining / limit > static_cast<double>(opt.max_substeps) - static_cast<double>(field.substeps)) {
        const bool drift_limited = 2.0 * am / dx >= 2.0 * dm / (dx * dx);
        throw RuntimeFailure(std::string("solve_vfp: CFL sub-step cap exceeded, limited by the ") +
                             (drift_limited ? "drift coefficient a (max |a| = " : "diffusion coefficient D (max D = ") +
                             std::to_string(drift_limited ? am : dm) + ")");
      }
      const double h = std::min(remaining, limit);
      const double lam = h / dx;
      parallel_for(U, opt.workers, [&](std::size_t q) {
        const double* r = &cur[q * n];
        const double* aq = &a[q * (n + 1)];
        const double* dq = &dcoef[q * n];
        double* out = &next[q * n];
        auto flux = [&](std::size_t i) {  // face i between cells i-1 and i
          if (i == 0 || i == n) return 0.0;
          const double adv = aq[i] > 0.0 ? aq[i] * r[i - 1] : aq[i] * r[i];
          return adv - (dq[i] * r[i] - dq[i - 1] * r[i - 1]) / dx;
        };
        double left = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double right = flux(i + 1);
          out[i] = r[i] - lam * (right - left);
          left = right;
        }
      });
      for (std::size_t j = 0; j < U * n; ++j)
        if (next[j] < -1e-12)
          throw RuntimeFailure("solve_vfp: negative density " + std::to_string(next[j]) + " at label " +
                               std::to_string(j / n) + ", cell " + std::to_string(j % n) + ", step " +
                               std::to_string(k));
      cur.swap(next);
      ++field.substeps;
      remaining = h == remaining ? 0.0 : remaining - h;
    }
    for (std::size_t q = 0; q < U; ++q) std::copy(&cur[q * n], &cur[q * n] + n, field.at(q, k + 1));
  }
  return field;
}

struct ComparisonEntry {
  std::size_t u_index = 0;
  std::string test;
  double t = 0.0;
  double pde = 0.0;
  double mc = 0.0;
  double gap = 0.0;
  double mc_stderr = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;
  double max_gap = 0.0;
};

// Default checkpoints T/4, T/2, 3T/4, T.
inline std::vector<double> default_checkpoints(double t_final) {
  return {0.25 * t_final, 0.5 * t_final, 0.75 * t_final, t_final};
}

inline ComparisonReport compare_to_mc(const DensityField& field, const MeanFieldSolution& sol,
                                      const std::vector<TestFunction>& tests, std::vector<double> times = {}) {
  require(field.u_grid == sol.u_grid, "compare_to_mc: label grids differ");
  require(std::abs(field.tg.t_final - sol.grid.t_final) <= 1e-12 * sol.grid.t_final,
          "compare_to_mc: horizons differ");
  require(sol.d == 1, "compare_to_mc: density comparison is one-dimensional");
  if (times.empty()) times = default_checkpoints(sol.grid.t_final);
  ComparisonReport rep;
  const double dx = field.xg.dx();
  for (std::size_t q = 0; q < sol.u_grid.size(); ++q)
    for (const auto& fn : tests)
      for (double t : times) {
        const std::size_t kp = field.tg.index_of(t), km = sol.grid.index_of(t);
        const double* r = field.at(q, kp);
        double pde = 0.0;
        for (std::size_t i = 0; i < field.xg.cells; ++i) pde += fn.phi(field.xg.center(i)) * r[i];
        pde *= dx;
        const PathEnsemble& e = sol.ensembles[q];
        double s = 0.0, s2 = 0.0;
        for (std::size_t m = 0; m < e.paths; ++m) {
          const double v = fn.phi(e.state(m, km)[0]);
          s += v;
          s2 += v * v;
        }
        const double M = static_cast<double>(e.paths);
        const double mean = s / M;
        const double var = std::max(0.0, (s2 - M * mean * mean) / (M - 1.0));
        ComparisonEntry c{q, fn.name, t, pde, mean, std::abs(pde - mean), std::sqrt(var / M)};
        rep.max_gap = std::max(rep.max_gap, c.gap);
        rep.entries.push_back(std::move(c));
      }
  return rep;
}

// CSV u,t,x,rho at the requested steps (all steps when empty).
inline void write_density_csv(std::ostream& out, const DensityField& field, std::vector<std::size_t> steps = {}) {
  if (steps.empty())
    for (std::size_t k = 0; k <= field.tg.steps; ++k) steps.push_back(k);
  char buf[128];
  out << "u,t,x,rho\n";
  for (std::size_t q = 0; q < field.u_grid.size(); ++q)
    for (std::size_t k : steps) {
      require(k <= field.tg.steps, "write_density_csv: step out of range");
      const double* r = field.at(q, k);
      for (std::size_t i = 0; i < field.xg.cells; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", field.u_grid[q], field.tg.time(k),
                      field.xg.center(i), r[i]);
        out << buf;
      }
    }
}

}  // namespace dgmlab
