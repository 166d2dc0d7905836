#pragma once

// Adjacency matrices, digraph measures (DGMs) and graph families.
//
// A DGM is stored as a grid of labels u_1 < ... < u_G in [0,1] with one
// fiber measure per label. Lookup is piecewise constant: a query u belongs
// to the first label u_i with u <= u_i (so cell i is (u_{i-1}, u_i]).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dgmlab/bl_distance.hpp"
#include "dgmlab/error.hpp"
#include "dgmlab/measure1d.hpp"
#include "dgmlab/rng.hpp"

namespace dgmlab {

// Dense square matrix, row-major.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> v;

  Matrix() = default;
  explicit Matrix(std::size_t size, double fill = 0.0) : n(size), v(size * size, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return v[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * n + j]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline void validate_adjacency(const Matrix& a, const std::string& what) {
  require(a.n >= 1, what + ": empty matrix");
  require(a.v.size() == a.n * a.n, what + ": not square");
  for (std::size_t k = 0; k < a.v.size(); ++k) {
    const double x = a.v[k];
    if (!(std::isfinite(x) && x >= 0.0))
      throw ValidationError(what + ": entry (" + std::to_string(k / a.n) + "," + std::to_string(k % a.n) +
                            ") is negative or non-finite");
  }
}

// Drift graph a and noise graph a_hat of an N-particle system.
struct AdjacencyPair {
  std::size_t n = 0;
  Matrix a;
  Matrix a_hat;

  AdjacencyPair() = default;
  AdjacencyPair(Matrix drift, Matrix noise) : n(drift.n), a(std::move(drift)), a_hat(std::move(noise)) {
    validate_adjacency(a, "AdjacencyPair drift");
    validate_adjacency(a_hat, "AdjacencyPair noise");
    require(a.n == a_hat.n, "AdjacencyPair: size mismatch");
  }
};

class DigraphMeasure {
 public:
  DigraphMeasure() = default;

  DigraphMeasure(std::vector<double> u_grid, std::vector<DiscreteMeasure1D> fibers)
      : u_grid_(std::move(u_grid)), fibers_(std::move(fibers)) {
    require(!u_grid_.empty(), "DigraphMeasure: empty grid");
    require(u_grid_.size() == fibers_.size(), "DigraphMeasure: grid and fiber counts differ");
    for (std::size_t i = 0; i < u_grid_.size(); ++i) {
      require(std::isfinite(u_grid_[i]) && u_grid_[i] >= 0.0 && u_grid_[i] <= 1.0,
              "DigraphMeasure: label outside [0,1]");
      require(i == 0 || u_grid_[i] > u_grid_[i - 1], "DigraphMeasure: grid not increasing");
    }
  }

  const std::vector<double>& u_grid() const { return u_grid_; }
  const std::vector<DiscreteMeasure1D>& fibers() const { return fibers_; }
  std::size_t size() const { return u_grid_.size(); }

  std::size_t cell_index(double u) const {
    const auto it = std::lower_bound(u_grid_.begin(), u_grid_.end(), u);
    if (it == u_grid_.end()) return u_grid_.size() - 1;
    return static_cast<std::size_t>(it - u_grid_.begin());
  }

  const DiscreteMeasure1D& fiber(double u) const { return fibers_[cell_index(u)]; }

  // Same grid, every fiber mass multiplied by factor.
  DigraphMeasure scaled(double factor) const {
    std::vector<DiscreteMeasure1D> out;
    out.reserve(fibers_.size());
    for (const auto& f : fibers_) out.push_back(f.scaled(factor));
    return {u_grid_, std::move(out)};
  }

  friend bool operator==(const DigraphMeasure&, const DigraphMeasure&) = default;

 private:
  std::vector<double> u_grid_;
  std::vector<DiscreteMeasure1D> fibers_;
};

inline DigraphMeasure dgm_from_matrix(const Matrix& a) {
  validate_adjacency(a, "dgm_from_matrix");
  const std::size_t n = a.n;
  const double dn = static_cast<double>(n);
  std::vector<double> grid(n);
  std::vector<DiscreteMeasure1D> fibers;
  fibers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i + 1) / dn;
    std::vector<Atom> atoms;
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j) > 0.0) atoms.push_back({static_cast<double>(j + 1) / dn, a(i, j) / dn});
    fibers.emplace_back(std::move(atoms));
  }
  return {std::move(grid), std::move(fibers)};
}

inline double dgm_norm(const DigraphMeasure& eta) {
  double best = 0.0;
  for (const auto& f : eta.fibers()) best = std::max(best, f.total_mass());
  return best;
}

// Max over the union of both label grids of the fiberwise BL distance.
// Identical fiber pairs are evaluated once.
inline double dgm_distance_inf(const DigraphMeasure& eta, const DigraphMeasure& zeta) {
  std::vector<double> grid;
  grid.reserve(eta.size() + zeta.size());
  std::merge(eta.u_grid().begin(), eta.u_grid().end(), zeta.u_grid().begin(), zeta.u_grid().end(),
             std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  // Canonical representative per distinct fiber, so repeated fibers share work.
  auto dedupe = [](const DigraphMeasure& d) {
    std::vector<std::size_t> rep(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      rep[i] = i;
      if (i > 0 && d.fibers()[i] == d.fibers()[rep[i - 1]]) rep[i] = rep[i - 1];
    }
    return rep;
  };
  const auto rep_eta = dedupe(eta);
  const auto rep_zeta = dedupe(zeta);

  std::map<std::pair<std::size_t, std::size_t>, double> memo;
  double best = 0.0;
  for (double u : grid) {
    const std::size_t i = rep_eta[eta.cell_index(u)];
    const std::size_t j = rep_zeta[zeta.cell_index(u)];
    auto [it, fresh] = memo.try_emplace({i, j}, 0.0);
    if (fresh) it->second = bl_distance(eta.fibers()[i], zeta.fibers()[j]);
    best = std::max(best, it->second);
  }
  return best;
}

// (1/n) max_i sum_j a_ij^2.
inline double check_growth_assumption(const Matrix& a) {
  validate_adjacency(a, "check_growth_assumption");
  double best = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.n; ++j) s += a(i, j) * a(i, j);
    best = std::max(best, s);
  }
  return best / static_cast<double>(a.n);
}

// ---------------------------------------------------------------------------
// Graph families

enum class GraphFamily { complete, ring, graphon_threshold, graphon_weighted, erdos_renyi, explicit_matrix };

// Named kernels W(u, v) usable as graphons.
struct GraphonKernel {
  std::string name = "constant";
  double param = 1.0;

  double operator()(double u, double v) const {
    if (name == "constant") return param;
    if (name == "product") return param * u * v;
    if (name == "exponential") return std::exp(-std::abs(u - v) / param);
    if (name == "minimum") return param * std::min(u, v);
    throw ValidationError("unknown graphon kernel '" + name + "'");
  }

  void validate() const {
    require(name == "constant" || name == "product" || name == "exponential" || name == "minimum",
            "unknown graphon kernel '" + name + "'");
    require(std::isfinite(param) && param >= 0.0, "graphon kernel parameter must be >= 0");
    if (name == "exponential") require(param > 0.0, "exponential kernel needs a positive scale");
  }
};

struct GraphSpec {
  GraphFamily family = GraphFamily::complete;
  // ring: fixed bandwidth k, or k = floor(n / k_divisor) when k_divisor > 0.
  std::size_t ring_k = 1;
  double ring_k_divisor = 0.0;
  double ring_c = 2.0;
  GraphonKernel kernel;
  double p = 0.5;
  Matrix explicit_a;
  Matrix explicit_a_hat;
  // Random families: draw the noise graph independently of the drift graph.
  bool distinct_noise = false;

  std::size_t ring_bandwidth(std::size_t n) const {
    if (ring_k_divisor > 0.0)
      return static_cast<std::size_t>(std::floor(static_cast<double>(n) / ring_k_divisor));
    return ring_k;
  }

  void validate() const {
    switch (family) {
      case GraphFamily::ring:
        require(ring_c > 0.0 && std::isfinite(ring_c), "ring: c must be > 0");
        require(ring_k_divisor > 0.0 || ring_k >= 1, "ring: k must be >= 1");
        break;
      case GraphFamily::erdos_renyi:
        require(p >= 0.0 && p <= 1.0, "erdos_renyi: p must lie in [0,1]");
        break;
      case GraphFamily::graphon_threshold:
      case GraphFamily::graphon_weighted:
        kernel.validate();
        break;
      case GraphFamily::explicit_matrix:
        validate_adjacency(explicit_a, "explicit graph");
        validate_adjacency(explicit_a_hat, "explicit noise graph");
        require(explicit_a.n == explicit_a_hat.n, "explicit graph: size mismatch");
        break;
      case GraphFamily::complete:
        break;
    }
  }
};

inline GraphFamily parse_graph_family(const std::string& s) {
  if (s == "complete") return GraphFamily::complete;
  if (s == "ring") return GraphFamily::ring;
  if (s == "graphon_threshold") return GraphFamily::graphon_threshold;
  if (s == "graphon_weighted") return GraphFamily::graphon_weighted;
  if (s == "erdos_renyi") return GraphFamily::erdos_renyi;
  if (s == "explicit") return GraphFamily::explicit_matrix;
  throw ValidationError("unknown graph family '" + s + "'");
}

inline std::string to_string(GraphFamily f) {
  switch (f) {
    case GraphFamily::complete: return "complete";
    case GraphFamily::ring: return "ring";
    case GraphFamily::graphon_threshold: return "graphon_threshold";
    case GraphFamily::graphon_weighted: return "graphon_weighted";
    case GraphFamily::erdos_renyi: return "erdos_renyi";
    case GraphFamily::explicit_matrix: return "explicit";
  }
  return "?";
}

inline Matrix generate_matrix(const GraphSpec& spec, std::size_t n, std::uint64_t seed, RngDomain domain,
                              bool noise_block = false) {
  require(n >= 1, "generate_graph: n must be >= 1");
  spec.validate();
  const double dn = static_cast<double>(n);
  Matrix a(n);
  switch (spec.family) {
    case GraphFamily::complete:
      std::fill(a.v.begin(), a.v.end(), 1.0);
      break;
    case GraphFamily::ring: {
      const std::size_t k = spec.ring_bandwidth(n);
      require(k >= 1, "ring: bandwidth k(n) = 0 at n = " + std::to_string(n));
      require(2 * k < n, "ring: k must be < n/2 (k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");
      const double w = spec.ring_c * dn / (2.0 * static_cast<double>(k));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t diff = i > j ? i - j : j - i;
          const std::size_t circ = std::min(diff, n - diff);
          if (circ > 0 && circ <= k) a(i, j) = w;
        }
      break;
    }
    case GraphFamily::graphon_weighted:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          a(i, j) = spec.kernel(static_cast<double>(i + 1) / dn, static_cast<double>(j + 1) / dn);
      break;
    case GraphFamily::graphon_threshold:
    case GraphFamily::erdos_renyi: {
      const KeyedRng rng(seed);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double prob = spec.family == GraphFamily::erdos_renyi
                                  ? spec.p
                                  : spec.kernel(static_cast<double>(i + 1) / dn, static_cast<double>(j + 1) / dn);
          const double draw = rng.uniform(domain, static_cast<std::uint64_t>(i), static_cast<std::uint32_t>(j), 0);
          a(i, j) = draw < prob ? 1.0 : 0.0;
        }
      break;
    }
    case GraphFamily::explicit_matrix:
      require(spec.explicit_a.n == n, "explicit graph: file has n = " + std::to_string(spec.explicit_a.n) +
                                          ", requested " + std::to_string(n));
      a = noise_block ? spec.explicit_a_hat : spec.explicit_a;
      break;
  }
  return a;
}

// Drift and noise graphs from one spec. Deterministic families give equal
// matrices; random families share the draw unless distinct_noise is set.
inline AdjacencyPair generate_graph(const GraphSpec& spec, std::size_t n, std::uint64_t seed) {
  Matrix a = generate_matrix(spec, n, seed, RngDomain::graph_drift, false);
  Matrix a_hat = spec.family == GraphFamily::explicit_matrix
                     ? generate_matrix(spec, n, seed, RngDomain::graph_drift, true)
                 : spec.distinct_noise ? generate_matrix(spec, n, seed, RngDomain::graph_noise, true)
                                       : a;
  return {std::move(a), std::move(a_hat)};
}

// Drift graph from one spec, noise graph from another.
inline AdjacencyPair generate_graph(const GraphSpec& drift, const GraphSpec& noise, std::size_t n,
                                    std::uint64_t seed) {
  Matrix a = generate_matrix(drift, n, seed, RngDomain::graph_drift, false);
  Matrix a_hat = generate_matrix(noise, n, seed, RngDomain::graph_noise, true);
  return {std::move(a), std::move(a_hat)};
}

// Limit DGM on labels i/G. Continuous fibers use G midpoint atoms; the ring
// limit c*delta_u puts a single atom at the label itself.
inline DigraphMeasure dgm_limit(const GraphSpec& spec, std::size_t grid_size) {
  require(grid_size >= 1, "dgm_limit: grid size must be >= 1");
  spec.validate();
  const double g = static_cast<double>(grid_size);
  std::vector<double> labels(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) labels[i] = static_cast<double>(i + 1) / g;

  auto density_fiber = [&](const std::function<double(double)>& w) {
    std::vector<Atom> atoms;
    atoms.reserve(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k) {
      const double v = (static_cast<double>(k) + 0.5) / g;
      const double weight = w(v) / g;
      if (weight > 0.0) atoms.push_back({v, weight});
    }
    return DiscreteMeasure1D(std::move(atoms));
  };

  std::vector<DiscreteMeasure1D> fibers;
  fibers.reserve(grid_size);
  switch (spec.family) {
    case GraphFamily::complete: {
      const auto fiber = density_fiber([](double) { return 1.0; });
      fibers.assign(grid_size, fiber);
      break;
    }
    case GraphFamily::erdos_renyi: {
      const double p = spec.p;
      const auto fiber = density_fiber([p](double) { return p; });
      fibers.assign(grid_size, fiber);
      break;
    }
    case GraphFamily::ring:
      for (double u : labels) fibers.push_back(DiscreteMeasure1D::dirac(u, spec.ring_c));
      break;
    case GraphFamily::graphon_threshold:
    case GraphFamily::graphon_weighted:
      for (double u : labels) fibers.push_back(density_fiber([&](double v) { return spec.kernel(u, v); }));
      break;
    case GraphFamily::explicit_matrix:
      throw UnsupportedError("dgm_limit: explicit matrices have no known limit");
  }
  return {std::move(labels), std::move(fibers)};
}

// ---------------------------------------------------------------------------
// Plain-text matrix files: "n" then n rows of n reals, once for the drift
// graph and once for the noise graph.

inline Matrix read_matrix_block(std::istream& in, const std::string& what) {
  long long n = 0;
  require(static_cast<bool>(in >> n), what + ": missing size line");
  require(n >= 1, what + ": size must be >= 1");
  Matrix a(static_cast<std::size_t>(n));
  for (auto& x : a.v) require(static_cast<bool>(in >> x), what + ": truncated matrix");
  validate_adjacency(a, what);
  return a;
}

inline std::pair<Matrix, Matrix> read_matrix_pair(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open matrix file '" + path + "'");
  Matrix a = read_matrix_block(in, path + " (drift block)");
  Matrix a_hat = read_matrix_block(in, path + " (noise block)");
  require(a.n == a_hat.n, path + ": drift and noise blocks differ in size");
  return {std::move(a), std::move(a_hat)};
}

inline void write_matrix_pair(std::ostream& out, const Matrix& a, const Matrix& a_hat) {
  char buf[32];
  for (const Matrix* m : {&a, &a_hat}) {
    out << m->n << '\n';
    for (std::size_t i = 0; i < m->n; ++i) {
      for (std::size_t j = 0; j < m->n; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", (*m)(i, j));
        out << (j ? " " : "") << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace dgmlab
