#pragma once

// Mean-field (McKean-Vlasov) limit by Picard iteration over laws.
//
// Each label u_q on the mean-field grid carries M sample paths. Iterate n
// integrates
//
//   dX_u = f(X_u) dt + int_I int g(X_u, y) mu^{n-1}_{v,t}(dy) eta^u(dv) dt
//          + [int_I int h(X_u, y) mu^{n-1}_{v,t}(dy) etahat^u(dv)] dB^u
//
// with the law of iterate n-1 frozen. Fiber atoms at v are attached to the
// nearest grid label. Brownian streams are keyed by (seed, q, m) and reused
// across iterates, so iterate-to-iterate distances measure only the change
// of the frozen law.

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "dgmlab/coefficients.hpp"
#include "dgmlab/empirical.hpp"
#include "dgmlab/error.hpp"
#include "dgmlab/graphs.hpp"
#include "dgmlab/metrics.hpp"
#include "dgmlab/parallel.hpp"
#include "dgmlab/particle_sim.hpp"
#include "dgmlab/rng.hpp"

namespace dgmlab {

// Cell midpoints (2q - 1) / (2U), q = 1..U.
inline std::vector<double> midpoint_grid(std::size_t count) {
  require(count >= 1, "midpoint_grid: need at least one point");
  std::vector<double> g(count);
  for (std::size_t q = 0; q < count; ++q) g[q] = (2.0 * static_cast<double>(q) + 1.0) / (2.0 * static_cast<double>(count));
  return g;
}

// Index of the grid point nearest to v (lower index on ties).
inline std::size_t nearest_index(const std::vector<double>& grid, double v) {
  std::size_t best = 0;
  for (std::size_t q = 1; q < grid.size(); ++q)
    if (std::abs(grid[q] - v) < std::abs(grid[best] - v)) best = q;
  return best;
}

// Fiber mass collected onto the nearest grid labels.
inline std::vector<double> aggregate_fiber(const DiscreteMeasure1D& fiber, const std::vector<double>& grid) {
  std::vector<double> w(grid.size(), 0.0);
  for (const auto& atom : fiber.atoms()) w[nearest_index(grid, atom.position)] += atom.weight;
  return w;
}

struct IterationRecord {
  std::size_t iterate = 0;
  double distance = 0.0;
  double wallclock_seconds = 0.0;
};

struct MeanFieldSolution {
  std::vector<double> u_grid;
  std::vector<PathEnsemble> ensembles;  // one per grid label, M paths each
  std::vector<IterationRecord> iteration_log;
  bool converged = false;
  TimeGrid grid;
  std::size_t d = 1;
  std::size_t samples = 0;

  EmpiricalMeasure law(std::size_t u_index, std::size_t step) const {
    require(u_index < ensembles.size(), "MeanFieldSolution::law: label index out of range");
    return empirical_measure(ensembles[u_index], step);
  }
};

struct PicardOptions {
  std::vector<double> u_grid;
  std::size_t samples = 1000;
  double tol = 1e-3;
  std::size_t max_iter = 20;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

namespace detail {

// Frozen law of one iterate, with per-(label, step) means for the affine
// shortcut.
class LawField {
 public:
  LawField(const std::vector<PathEnsemble>& ens, std::size_t d) : ens_(&ens), d_(d) {
    const std::size_t steps = ens.front().grid.steps;
    means_.assign(ens.size() * (steps + 1) * d, 0.0);
    for (std::size_t q = 0; q < ens.size(); ++q)
      for (std::size_t k = 0; k <= steps; ++k)
        for (std::size_t c = 0; c < d; ++c) means_[(q * (steps + 1) + k) * d + c] = ensemble_mean(ens[q], k, c);
    steps_ = steps;
  }

  // sum_q w_q E_{Y ~ law_q(k)} g(x, Y), written to out.
  void drift(const CoefficientSet& cs, const std::vector<double>& w, double w_total, const double* x,
             std::size_t k, double* out, double* scratch, double* ybar) const {
    std::fill(out, out + d_, 0.0);
    if (cs.g_is_zero || w_total == 0.0) return;
    if (cs.g_dependence == YDependence::general) {
      for (std::size_t q = 0; q < w.size(); ++q) {
        if (w[q] == 0.0) continue;
        const PathEnsemble& e = (*ens_)[q];
        const double scale = w[q] / static_cast<double>(e.paths);
        for (std::size_t m = 0; m < e.paths; ++m) {
          cs.g(x, e.state(m, k), scratch);
          for (std::size_t c = 0; c < d_; ++c) out[c] += scale * scratch[c];
        }
      }
      return;
    }
    mixture_point(cs.g_dependence, w, w_total, x, k, ybar);
    cs.g(x, ybar, scratch);
    for (std::size_t c = 0; c < d_; ++c) out[c] = w_total * scratch[c];
  }

  // sum_q w_q E_{Y ~ law_q(k)} h(x, Y).
  double noise(const CoefficientSet& cs, const std::vector<double>& w, double w_total, const double* x,
               std::size_t k, double* ybar) const {
    if (cs.h_is_zero || w_total == 0.0) return 0.0;
    if (cs.h_dependence == YDependence::general) {
      double acc = 0.0;
      for (std::size_t q = 0; q < w.size(); ++q) {
        if (w[q] == 0.0) continue;
        const PathEnsemble& e = (*ens_)[q];
        double s = 0.0;
        for (std::size_t m = 0; m < e.paths; ++m) s += cs.h(x, e.state(m, k));
        acc += w[q] * s / static_cast<double>(e.paths);
      }
      return acc;
    }
    mixture_point(cs.h_dependence, w, w_total, x, k, ybar);
    return w_total * cs.h(x, ybar);
  }

 private:
  void mixture_point(YDependence dep, const std::vector<double>& w, double w_total, const double* x, std::size_t k,
                     double* ybar) const {
    if (dep == YDependence::none) {
      std::copy(x, x + d_, ybar);
      return;
    }
    std::fill(ybar, ybar + d_, 0.0);
    for (std::size_t q = 0; q < w.size(); ++q) {
      if (w[q] == 0.0) continue;
      const double* mean = &means_[(q * (steps_ + 1) + k) * d_];
      for (std::size_t c = 0; c < d_; ++c) ybar[c] += w[q] * mean[c];
    }
    for (std::size_t c = 0; c < d_; ++c) ybar[c] /= w_total;
  }

  const std::vector<PathEnsemble>* ens_;
  std::size_t d_;
  std::size_t steps_ = 0;
  std::vector<double> means_;
};

inline double total(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) s += x;
  return s;
}

// One Euler-Maruyama path against a frozen law. x0 is the initial state,
// store/path select the Brownian increments, out receives steps+1 states.
inline void integrate_path(const CoefficientSet& cs, const LawField& law, const std::vector<double>& w_drift,
                           const std::vector<double>& w_noise, const double* x0, const BrownianStore& store,
                           std::size_t path, const TimeGrid& grid, double* out, const char* who) {
  const std::size_t d = cs.d;
  const double dt = grid.dt();
  const double wd = total(w_drift), wn = total(w_noise);
  thread_local std::vector<double> buf;
  buf.resize(5 * d);
  double* x = buf.data();
  double* fx = x + d;
  double* gx = x + 2 * d;
  double* scratch = x + 3 * d;
  double* ybar = x + 4 * d;
  std::copy(x0, x0 + d, x);
  std::copy(x, x + d, out);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    cs.f(x, fx);
    law.drift(cs, w_drift, wd, x, k, gx, scratch, ybar);
    const double amp = law.noise(cs, w_noise, wn, x, k, ybar);
    const double* db = store.increment(path, k);
    for (std::size_t c = 0; c < d; ++c) x[c] += (fx[c] + gx[c]) * dt + amp * db[c];
    check_state(x, d, k + 1, path, who);
    std::copy(x, x + d, out + (k + 1) * d);
  }
}

}  // namespace detail

inline MeanFieldSolution picard_solve(const DigraphMeasure& eta, const DigraphMeasure& eta_hat,
                                      const CoefficientSet& cs, const InitialLaw& law, const TimeGrid& grid,
                                      const PicardOptions& opt) {
  cs.validate();
  law.validate();
  grid.validate();
  require(opt.samples >= 2, "picard_solve: need at least 2 samples per label");
  require(opt.tol > 0.0, "picard_solve: tol must be > 0");
  require(opt.max_iter >= 1, "picard_solve: max_iter must be >= 1");
  require(!opt.u_grid.empty(), "picard_solve: empty label grid");
  for (std::size_t q = 0; q < opt.u_grid.size(); ++q)
    require(opt.u_grid[q] >= 0.0 && opt.u_grid[q] <= 1.0 && (q == 0 || opt.u_grid[q] > opt.u_grid[q - 1]),
            "picard_solve: label grid must be increasing inside [0,1]");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t U = opt.u_grid.size(), M = opt.samples, d = cs.d, steps = grid.steps;

  MeanFieldSolution sol;
  sol.u_grid = opt.u_grid;
  sol.grid = grid;
  sol.d = d;
  sol.samples = M;

  std::vector<std::vector<double>> w_drift(U), w_noise(U);
  for (std::size_t q = 0; q < U; ++q) {
    w_drift[q] = aggregate_fiber(eta.fiber(opt.u_grid[q]), opt.u_grid);
    w_noise[q] = aggregate_fiber(eta_hat.fiber(opt.u_grid[q]), opt.u_grid);
  }

  // Iterate 0: constant in time at the initial draw.
  const KeyedRng rng(opt.seed);
  std::vector<PathEnsemble> prev(U);
  std::vector<std::shared_ptr<const BrownianStore>> stores(U);
  for (std::size_t q = 0; q < U; ++q) {
    std::vector<std::uint64_t> ids(M);
    for (std::size_t m = 0; m < M; ++m) ids[m] = (static_cast<std::uint64_t>(q) << 32) | m;
    stores[q] = std::make_shared<BrownianStore>(opt.seed, RngDomain::meanfield_brownian, ids, grid, d, opt.workers);
    PathEnsemble e(M, d, grid);
    e.brownian = stores[q];
    e.labels.assign(M, opt.u_grid[q]);
    for (std::size_t m = 0; m < M; ++m) {
      sample_initial_one(law, opt.u_grid[q], rng, RngDomain::meanfield_initial, ids[m], d, e.state(m, 0));
      for (std::size_t k = 1; k <= steps; ++k) std::copy(e.state(m, 0), e.state(m, 0) + d, e.state(m, k));
    }
    prev[q] = std::move(e);
  }

  for (std::size_t n = 1; n <= opt.max_iter; ++n) {
    const detail::LawField field(prev, d);
    std::vector<PathEnsemble> next(U);
    for (std::size_t q = 0; q < U; ++q) {
      next[q] = PathEnsemble(M, d, grid);
      next[q].brownian = stores[q];
      next[q].labels = prev[q].labels;
    }
    parallel_for(U * M, opt.workers, [&](std::size_t idx) {
      const std::size_t q = idx / M, m = idx % M;
      detail::integrate_path(cs, field, w_drift[q], w_noise[q], prev[q].state(m, 0), *stores[q], m, grid,
                             next[q].state(m, 0), "picard_solve");
    });

    double dist = 0.0;
    for (std::size_t q = 0; q < U; ++q) {
      const CoupledPairs cp(next[q], prev[q]);
      dist = std::max(dist, std::sqrt(path_sup_distance_sq(cp, steps)));
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    sol.iteration_log.push_back({n, dist, elapsed});
    prev = std::move(next);
    if (dist < opt.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.ensembles = std::move(prev);
  return sol;
}

// Mean-field representatives X_{i/N} driven by particle i's initial state
// and Brownian increments, against the solution's law.
inline PathEnsemble simulate_representatives(const DigraphMeasure& eta, const DigraphMeasure& eta_hat,
                                             const CoefficientSet& cs, const MeanFieldSolution& sol,
                                             const PathEnsemble& particles, std::size_t workers = 1) {
  require(!sol.ensembles.empty(), "simulate_representatives: empty solution");
  require(particles.brownian != nullptr, "simulate_representatives: particles carry no Brownian store");
  require(particles.grid == sol.grid, "simulate_representatives: time grid mismatch");
  require(particles.brownian->grid() == sol.grid, "simulate_representatives: Brownian grid mismatch");
  require(particles.d == sol.d && cs.d == sol.d, "simulate_representatives: dimension mismatch");
  require(particles.labels.size() == particles.paths, "simulate_representatives: particles carry no labels");
  const std::size_t n = particles.paths;
  const detail::LawField field(sol.ensembles, sol.d);
  PathEnsemble reps(n, sol.d, sol.grid);
  reps.brownian = particles.brownian;
  reps.labels = particles.labels;
  parallel_for(n, workers, [&](std::size_t i) {
    const double u = particles.labels[i];
    const auto wd = aggregate_fiber(eta.fiber(u), sol.u_grid);
    const auto wn = aggregate_fiber(eta_hat.fiber(u), sol.u_grid);
    detail::integrate_path(cs, field, wd, wn, particles.state(i, 0), *particles.brownian, i, sol.grid,
                           reps.state(i, 0), "simulate_representatives");
  });
  return reps;
}

struct CouplingReport {
  std::vector<double> per_particle_sup_sq;
  double mean = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
};

inline CouplingReport coupling_error(const PathEnsemble& particles, const PathEnsemble& reps) {
  const CoupledPairs cp(particles, reps);
  CouplingReport r;
  r.per_particle_sup_sq.resize(particles.paths);
  double s = 0.0;
  for (std::size_t i = 0; i < particles.paths; ++i) {
    r.per_particle_sup_sq[i] = cp.sup_sq(i, particles.grid.steps);
    s += r.per_particle_sup_sq[i];
  }
  r.mean = particles.paths ? s / static_cast<double>(particles.paths) : 0.0;
  return r;
}

// Per-cell coupling estimate sqrt(mean of sup-squared gaps) for the
// particles whose label falls in each cell of the given label grid. Cells
// holding no particle are skipped.
inline std::vector<double> coupling_per_cell(const CouplingReport& report, const std::vector<double>& labels,
                                             const std::vector<double>& u_grid) {
  require(labels.size() == report.per_particle_sup_sq.size(), "coupling_per_cell: label count mismatch");
  std::vector<double> sum(u_grid.size(), 0.0);
  std::vector<std::size_t> count(u_grid.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t q = nearest_index(u_grid, labels[i]);
    sum[q] += report.per_particle_sup_sq[i];
    ++count[q];
  }
  std::vector<double> out;
  for (std::size_t q = 0; q < u_grid.size(); ++q)
    if (count[q] > 0) out.push_back(std::sqrt(sum[q] / static_cast<double>(count[q])));
  return out;
}

// Pools every label's samples with equal weight.
inline EmpiricalMeasure barmu(const MeanFieldSolution& sol, std::size_t step) {
  require(!sol.ensembles.empty(), "barmu: empty solution");
  require(step <= sol.grid.steps, "barmu: step out of range");
  std::vector<double> pts, w;
  for (const auto& e : sol.ensembles) {
    const double each = 1.0 / (static_cast<double>(sol.ensembles.size()) * static_cast<double>(e.paths));
    for (std::size_t m = 0; m < e.paths; ++m) {
      pts.insert(pts.end(), e.state(m, step), e.state(m, step) + e.d);
      w.push_back(each);
    }
  }
  return {sol.d, std::move(pts), std::move(w)};
}

// W2 between the laws of neighbouring labels at one step (d = 1).
inline std::vector<double> adjacent_law_w2(const MeanFieldSolution& sol, std::size_t step) {
  std::vector<double> out;
  for (std::size_t q = 0; q + 1 < sol.ensembles.size(); ++q)
    out.push_back(wasserstein2_1d(sol.law(q, step), sol.law(q + 1, step)));
  return out;
}

// Smooth test function of the first state component.
struct TestFunction {
  std::string name;
  std::function<double(double)> phi, dphi, d2phi;
};

inline TestFunction monomial(int power) {
  require(power >= 0, "monomial: power must be >= 0");
  const double p = power;
  return {"x^" + std::to_string(power), [p](double x) { return std::pow(x, p); },
          [p](double x) { return p == 0 ? 0.0 : p * std::pow(x, p - 1); },
          [p](double x) { return p < 2 ? 0.0 : p * (p - 1) * std::pow(x, p - 2); }};
}

inline TestFunction gaussian_bump(double center, double width) {
  require(width > 0.0, "gaussian_bump: width must be > 0");
  const double s2 = width * width;
  return {"bump", [=](double x) { return std::exp(-(x - center) * (x - center) / (2 * s2)); },
          [=](double x) { return -(x - center) / s2 * std::exp(-(x - center) * (x - center) / (2 * s2)); },
          [=](double x) {
            const double z = x - center;
            return (z * z / (s2 * s2) - 1.0 / s2) * std::exp(-z * z / (2 * s2));
          }};
}

struct WeakResidual {
  double residual_plain = 0.0;  // |mean of the weak-form defect|
  double stderr_plain = 0.0;    // sample sd of the per-path defect / sqrt(M)
  double residual_cv = 0.0;     // same with the Ito martingale subtracted path by path
  double stderr_cv = 0.0;
};

// Weak-form defect of the label-q law on steps [k1, k2]:
//   <phi, mu_t2> - <phi, mu_t1> - int <phi'(f + G) + (1/2) H^2 phi'', mu_s> ds
// with the time integral by the trapezoid rule. The control-variate version
// subtracts sum_k phi'(X_k) H(X_k) dB_k, which has mean zero.
inline WeakResidual weak_form_residual(const MeanFieldSolution& sol, const DigraphMeasure& eta,
                                       const DigraphMeasure& eta_hat, const CoefficientSet& cs,
                                       const TestFunction& test, std::size_t u_index, std::size_t k1,
                                       std::size_t k2) {
  require(u_index < sol.ensembles.size(), "weak_form_residual: label index out of range");
  require(k1 < k2 && k2 <= sol.grid.steps, "weak_form_residual: need t1 < t2 on the grid");
  const PathEnsemble& e = sol.ensembles[u_index];
  require(e.brownian != nullptr, "weak_form_residual: ensemble carries no Brownian store");
  const std::size_t d = sol.d, M = e.paths;
  const double dt = sol.grid.dt();
  const double u = sol.u_grid[u_index];
  const auto wd = aggregate_fiber(eta.fiber(u), sol.u_grid);
  const auto wn = aggregate_fiber(eta_hat.fiber(u), sol.u_grid);
  const double wd_total = detail::total(wd), wn_total = detail::total(wn);
  const detail::LawField field(sol.ensembles, d);

  std::vector<double> fx(d), gx(d), scratch(d), ybar(d);
  std::vector<double> plain(M), cv(M);
  for (std::size_t m = 0; m < M; ++m) {
    double integral = 0.0, martingale = 0.0;
    for (std::size_t k = k1; k <= k2; ++k) {
      const double* x = e.state(m, k);
      cs.f(x, fx.data());
      field.drift(cs, wd, wd_total, x, k, gx.data(), scratch.data(), ybar.data());
      const double amp = field.noise(cs, wn, wn_total, x, k, ybar.data());
      const double slope = test.dphi(x[0]);
      const double integrand = slope * (fx[0] + gx[0]) + 0.5 * amp * amp * test.d2phi(x[0]);
      integral += (k == k1 || k == k2 ? 0.5 : 1.0) * integrand * dt;
      if (k < k2) martingale += slope * amp * e.brownian->increment(m, k)[0];
    }
    plain[m] = test.phi(e.state(m, k2)[0]) - test.phi(e.state(m, k1)[0]) - integral;
    cv[m] = plain[m] - martingale;
  }
  auto summarize = [M](const std::vector<double>& z, double& value, double& se) {
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(M);
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= static_cast<double>(M - 1);
    value = std::abs(mean);
    se = std::sqrt(var / static_cast<double>(M));
  };
  WeakResidual r;
  summarize(plain, r.residual_plain, r.stderr_plain);
  summarize(cv, r.residual_cv, r.stderr_cv);
  return r;
}

}  // namespace dgmlab
