#pragma once

// Euler-Maruyama simulation of the N-particle system
//
//   dX_i = f(X_i) dt + (1/N) sum_j A_ij g(X_i, X_j) dt
//          + [(1/N) sum_j Ahat_ij h(X_i, X_j)] dB^i
//
// with Brownian increments drawn from a keyed generator, so particle i's
// noise is the same whether it is simulated alone, in a batch, or reused
// by its mean-field representative.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "dgmlab/coefficients.hpp"
#include "dgmlab/empirical.hpp"
#include "dgmlab/error.hpp"
#include "dgmlab/graphs.hpp"
#include "dgmlab/parallel.hpp"
#include "dgmlab/rng.hpp"

namespace dgmlab {

struct TimeGrid {
  double t_final = 1.0;
  std::size_t steps = 1;

  TimeGrid() = default;
  TimeGrid(double t, std::size_t n) : t_final(t), steps(n) { validate(); }

  void validate() const {
    require(std::isfinite(t_final) && t_final > 0.0, "TimeGrid: T must be > 0");
    require(steps >= 1, "TimeGrid: steps must be >= 1");
  }
  double dt() const { return t_final / static_cast<double>(steps); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt(); }
  // Nearest grid node to time t.
  std::size_t index_of(double t) const {
    const double k = std::round(t / dt());
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(steps)));
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

// Increments [paths][steps][d], each N(0, dt), keyed by
// (seed, domain, stream id of the path, step, component).
class BrownianStore {
 public:
  BrownianStore() = default;

  BrownianStore(std::uint64_t seed, RngDomain domain, std::vector<std::uint64_t> streams, const TimeGrid& grid,
                std::size_t d, std::size_t workers = 1)
      : seed_(seed), domain_(domain), streams_(std::move(streams)), grid_(grid), d_(d) {
    grid_.validate();
    require(d_ >= 1, "BrownianStore: dimension must be >= 1");
    const std::size_t steps = grid_.steps;
    const double scale = std::sqrt(grid_.dt());
    increments_.resize(streams_.size() * steps * d_);
    const KeyedRng rng(seed_);
    parallel_for(streams_.size(), workers, [&](std::size_t p) {
      double* out = increments_.data() + p * steps * d_;
      for (std::size_t k = 0; k < steps; ++k)
        for (std::size_t c = 0; c < d_; ++c)
          out[k * d_ + c] = scale * rng.normal(domain_, streams_[p], static_cast<std::uint32_t>(k),
                                               static_cast<std::uint32_t>(c));
    });
  }

  // Paths 0..count-1 keyed by their own index.
  static BrownianStore indexed(std::uint64_t seed, RngDomain domain, std::size_t count, const TimeGrid& grid,
                               std::size_t d, std::size_t workers = 1) {
    std::vector<std::uint64_t> ids(count);
    for (std::size_t i = 0; i < count; ++i) ids[i] = i;
    return {seed, domain, std::move(ids), grid, d, workers};
  }

  std::size_t paths() const { return streams_.size(); }
  std::size_t dim() const { return d_; }
  const TimeGrid& grid() const { return grid_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream(std::size_t p) const { return streams_[p]; }

  const double* increment(std::size_t p, std::size_t k) const {
    return increments_.data() + (p * grid_.steps + k) * d_;
  }

 private:
  std::uint64_t seed_ = 0;
  RngDomain domain_ = RngDomain::particle_brownian;
  std::vector<std::uint64_t> streams_;
  TimeGrid grid_;
  std::size_t d_ = 1;
  std::vector<double> increments_;
};

// States [paths][steps + 1][d].
struct PathEnsemble {
  std::size_t paths = 0;
  std::size_t d = 1;
  TimeGrid grid;
  std::vector<double> states;
  std::shared_ptr<const BrownianStore> brownian;
  std::vector<double> labels;

  PathEnsemble() = default;
  PathEnsemble(std::size_t n, std::size_t dim, const TimeGrid& g)
      : paths(n), d(dim), grid(g), states(n * (g.steps + 1) * dim, 0.0) {}

  double* state(std::size_t p, std::size_t k) { return states.data() + (p * (grid.steps + 1) + k) * d; }
  const double* state(std::size_t p, std::size_t k) const {
    return states.data() + (p * (grid.steps + 1) + k) * d;
  }
};

namespace detail {

inline std::vector<double> row_masses(const Matrix& a) {
  std::vector<double> m(a.n, 0.0);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < a.n; ++j) m[i] += a(i, j);
  return m;
}

// (1/N) sum_j A_ij g(x_i, x_j) for one particle, written to out[0..d).
inline void graph_drift_sum(const CoefficientSet& cs, const Matrix& a, const std::vector<double>& row_mass,
                            const double* snapshot, std::size_t i, double* out, double* scratch, double* ybar) {
  const std::size_t n = a.n, d = cs.d;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double* xi = snapshot + i * d;
  std::fill(out, out + d, 0.0);
  if (cs.g_is_zero) return;
  const double* row = &a.v[i * n];
  if (cs.g_dependence == YDependence::general) {
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] == 0.0) continue;
      cs.g(xi, snapshot + j * d, scratch);
      for (std::size_t c = 0; c < d; ++c) out[c] += row[j] * scratch[c];
    }
    for (std::size_t c = 0; c < d; ++c) out[c] *= inv_n;
    return;
  }
  const double mass = row_mass[i];
  if (mass == 0.0) return;
  std::fill(ybar, ybar + d, 0.0);
  if (cs.g_dependence == YDependence::affine)
    for (std::size_t j = 0; j < n; ++j)
      if (row[j] != 0.0)
        for (std::size_t c = 0; c < d; ++c) ybar[c] += row[j] * snapshot[j * d + c];
  if (cs.g_dependence == YDependence::affine)
    for (std::size_t c = 0; c < d; ++c) ybar[c] /= mass;
  else
    std::copy(xi, xi + d, ybar);
  cs.g(xi, ybar, scratch);
  for (std::size_t c = 0; c < d; ++c) out[c] = mass * inv_n * scratch[c];
}

// (1/N) sum_j Ahat_ij h(x_i, x_j) for one particle.
inline double graph_noise_sum(const CoefficientSet& cs, const Matrix& a_hat, const std::vector<double>& row_mass,
                              const double* snapshot, std::size_t i, double* ybar) {
  if (cs.h_is_zero) return 0.0;
  const std::size_t n = a_hat.n, d = cs.d;
  const double* xi = snapshot + i * d;
  const double* row = &a_hat.v[i * n];
  double acc = 0.0;
  if (cs.h_dependence == YDependence::general) {
    for (std::size_t j = 0; j < n; ++j)
      if (row[j] != 0.0) acc += row[j] * cs.h(xi, snapshot + j * d);
    return acc / static_cast<double>(n);
  }
  const double mass = row_mass[i];
  if (mass == 0.0) return 0.0;
  std::fill(ybar, ybar + d, 0.0);
  if (cs.h_dependence == YDependence::affine)
    for (std::size_t j = 0; j < n; ++j)
      if (row[j] != 0.0)
        for (std::size_t c = 0; c < d; ++c) ybar[c] += row[j] * snapshot[j * d + c];
  if (cs.h_dependence == YDependence::affine)
    for (std::size_t c = 0; c < d; ++c) ybar[c] /= mass;
  else
    std::copy(xi, xi + d, ybar);
  return mass / static_cast<double>(n) * cs.h(xi, ybar);
}

inline void check_state(const double* x, std::size_t d, std::size_t step, std::size_t path, const char* what) {
  for (std::size_t c = 0; c < d; ++c)
    if (!std::isfinite(x[c]))
      throw RuntimeFailure(std::string(what) + ": non-finite state at step " + std::to_string(step) + ", path " +
                           std::to_string(path));
}

}  // namespace detail

// Particle i (0-based) has label u = (i+1)/N; its initial state is keyed by
// (seed, particle_initial, i) and its noise by (seed, particle_brownian, i).
inline PathEnsemble simulate_particles(const AdjacencyPair& pair, const CoefficientSet& cs, const InitialLaw& law,
                                       const TimeGrid& grid, std::uint64_t seed, std::size_t workers = 1) {
  cs.validate();
  law.validate();
  grid.validate();
  require(pair.n >= 1, "simulate_particles: need at least one particle");
  require(pair.a.n == pair.n && pair.a_hat.n == pair.n, "simulate_particles: graph size mismatch");
  const std::size_t n = pair.n, d = cs.d, steps = grid.steps;
  const double dt = grid.dt();

  auto store = std::make_shared<BrownianStore>(
      BrownianStore::indexed(seed, RngDomain::particle_brownian, n, grid, d, workers));
  PathEnsemble ens(n, d, grid);
  ens.brownian = store;
  ens.labels.resize(n);
  const KeyedRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    ens.labels[i] = static_cast<double>(i + 1) / static_cast<double>(n);
    sample_initial_one(law, ens.labels[i], rng, RngDomain::particle_initial, i, d, ens.state(i, 0));
    detail::check_state(ens.state(i, 0), d, 0, i, "simulate_particles");
  }

  const auto mass_a = detail::row_masses(pair.a);
  const auto mass_a_hat = detail::row_masses(pair.a_hat);
  std::vector<double> snapshot(n * d), next(n * d);
  for (std::size_t i = 0; i < n; ++i) std::copy(ens.state(i, 0), ens.state(i, 0) + d, &snapshot[i * d]);

  for (std::size_t k = 0; k < steps; ++k) {
    parallel_for(n, workers, [&](std::size_t i) {
      thread_local std::vector<double> buf;
      buf.resize(4 * d);
      double* drift = buf.data();
      double* inter = buf.data() + d;
      double* scratch = buf.data() + 2 * d;
      double* ybar = buf.data() + 3 * d;
      const double* xi = &snapshot[i * d];
      cs.f(xi, drift);
      detail::graph_drift_sum(cs, pair.a, mass_a, snapshot.data(), i, inter, scratch, ybar);
      const double amp = detail::graph_noise_sum(cs, pair.a_hat, mass_a_hat, snapshot.data(), i, ybar);
      const double* db = store->increment(i, k);
      double* out = &next[i * d];
      for (std::size_t c = 0; c < d; ++c) out[c] = xi[c] + (drift[c] + inter[c]) * dt + amp * db[c];
    });
    for (std::size_t i = 0; i < n; ++i) {
      detail::check_state(&next[i * d], d, k + 1, i, "simulate_particles");
      std::copy(&next[i * d], &next[i * d] + d, ens.state(i, k + 1));
    }
    snapshot.swap(next);
  }
  return ens;
}

inline EmpiricalMeasure empirical_measure(const PathEnsemble& ens, std::size_t step) {
  require(step <= ens.grid.steps, "empirical_measure: step out of range");
  require(ens.paths >= 1, "empirical_measure: empty ensemble");
  std::vector<double> pts(ens.paths * ens.d);
  for (std::size_t p = 0; p < ens.paths; ++p)
    std::copy(ens.state(p, step), ens.state(p, step) + ens.d, &pts[p * ens.d]);
  return EmpiricalMeasure::uniform(ens.d, std::move(pts));
}

inline double second_moment(const PathEnsemble& ens, std::size_t step) {
  require(step <= ens.grid.steps, "second_moment: step out of range");
  require(ens.paths >= 1, "second_moment: empty ensemble");
  double s = 0.0;
  for (std::size_t p = 0; p < ens.paths; ++p) {
    const double* x = ens.state(p, step);
    for (std::size_t c = 0; c < ens.d; ++c) s += x[c] * x[c];
  }
  return s / static_cast<double>(ens.paths);
}

// Mean of component c across paths at a step.
inline double ensemble_mean(const PathEnsemble& ens, std::size_t step, std::size_t c = 0) {
  double s = 0.0;
  for (std::size_t p = 0; p < ens.paths; ++p) s += ens.state(p, step)[c];
  return s / static_cast<double>(ens.paths);
}

// Text dump: header "# N d steps dt seed", then one tab-separated line per
// (path, step): path, time, state components.
inline void write_trajectories(std::ostream& out, const PathEnsemble& ens, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", ens.grid.dt());
  out << "# N=" << ens.paths << "\td=" << ens.d << "\tsteps=" << ens.grid.steps << "\tdt=" << buf
      << "\tseed=" << seed << '\n';
  for (std::size_t p = 0; p < ens.paths; ++p)
    for (std::size_t k = 0; k <= ens.grid.steps; ++k) {
      out << p;
      std::snprintf(buf, sizeof buf, "%.17g", ens.grid.time(k));
      out << '\t' << buf;
      for (std::size_t c = 0; c < ens.d; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", ens.state(p, k)[c]);
        out << '\t' << buf;
      }
      out << '\n';
    }
}

}  // namespace dgmlab
