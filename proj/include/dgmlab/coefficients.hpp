#pragma once

// Dynamics coefficients (f, g, h) with declared bounds, initial laws, and
// the closed-form stability/convergence constants built from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dgmlab/error.hpp"
#include "dgmlab/rng.hpp"

namespace dgmlab {

// How an interaction term depends on its second argument. Affine and
// constant dependence let sums over neighbours collapse to one evaluation:
// sum_j w_j g(x, y_j) = W g(x, sum_j w_j y_j / W) when g is affine in y.
enum class YDependence { general, affine, none };

struct DeclaredBounds {
  double b_f = 0.0, l_f = 0.0;
  double b_g = 0.0, l_g = 0.0;
  double b_h = 0.0, l_h = 0.0;
};

struct CoefficientSet {
  using DriftFn = std::function<void(const double* x, double* out)>;
  using PairFn = std::function<void(const double* x, const double* y, double* out)>;
  using NoiseFn = std::function<double(const double* x, const double* y)>;

  std::size_t d = 1;
  DriftFn f;
  PairFn g;
  NoiseFn h;
  YDependence g_dependence = YDependence::general;
  YDependence h_dependence = YDependence::general;
  bool g_is_zero = false;
  bool h_is_zero = false;
  DeclaredBounds bounds;
  std::string description;

  void validate() const {
    require(d >= 1, "CoefficientSet: dimension must be >= 1");
    require(f && g && h, "CoefficientSet: f, g and h must all be set");
    const double c[] = {bounds.b_f, bounds.l_f, bounds.b_g, bounds.l_g, bounds.b_h, bounds.l_h};
    for (double v : c) require(std::isfinite(v) && v >= 0.0, "CoefficientSet: declared constants must be finite and >= 0");
  }
};

// A coefficient family chosen by name with numeric parameters.
struct FamilySpec {
  std::string name = "zero";
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
  double need(const std::string& key) const {
    const auto it = params.find(key);
    require(it != params.end(), "family '" + name + "' needs parameter '" + key + "'");
    require(std::isfinite(it->second), "family '" + name + "': parameter '" + key + "' is not finite");
    return it->second;
  }
};

// Builds (f, g, h) from named families.
//
// drift:        zero | linear{rate, offset}: f = rate*x + offset | saturating{rate}: f = -rate*tanh(x)
// interaction:  zero | linear{k}: g = k(y - x) | sine{k}: k sin(y - x) | tanh{k}: k tanh(y - x)
// noise:        zero | constant{sigma} | modulated{sigma, beta}: sigma (1 + beta sin(y_0 - x_0))
//
// Linear maps are unbounded on R^d, so their B constants are declared for the
// box [-box_radius, box_radius]^d.
inline CoefficientSet build_coefficients(const FamilySpec& drift, const FamilySpec& interaction,
                                         const FamilySpec& noise, std::size_t d, double box_radius) {
  require(d >= 1, "dimension must be >= 1");
  require(std::isfinite(box_radius) && box_radius > 0.0, "box_radius must be > 0");
  CoefficientSet cs;
  cs.d = d;
  const double rd = std::sqrt(static_cast<double>(d));

  if (drift.name == "zero") {
    cs.f = [d](const double*, double* out) { std::fill(out, out + d, 0.0); };
  } else if (drift.name == "linear") {
    const double rate = drift.need("rate"), offset = drift.get("offset", 0.0);
    cs.f = [d, rate, offset](const double* x, double* out) {
      for (std::size_t k = 0; k < d; ++k) out[k] = rate * x[k] + offset;
    };
    cs.bounds.b_f = std::abs(rate) * box_radius * rd + std::abs(offset) * rd;
    cs.bounds.l_f = std::abs(rate);
  } else if (drift.name == "saturating") {
    const double rate = drift.need("rate");
    cs.f = [d, rate](const double* x, double* out) {
      for (std::size_t k = 0; k < d; ++k) out[k] = -rate * std::tanh(x[k]);
    };
    cs.bounds.b_f = std::abs(rate) * rd;
    cs.bounds.l_f = std::abs(rate);
  } else {
    throw ValidationError("unknown drift family '" + drift.name + "'");
  }

  if (interaction.name == "zero") {
    cs.g = [d](const double*, const double*, double* out) { std::fill(out, out + d, 0.0); };
    cs.g_dependence = YDependence::none;
    cs.g_is_zero = true;
  } else if (interaction.name == "linear") {
    const double k = interaction.need("k");
    cs.g = [d, k](const double* x, const double* y, double* out) {
      for (std::size_t c = 0; c < d; ++c) out[c] = k * (y[c] - x[c]);
    };
    cs.g_dependence = YDependence::affine;
    cs.bounds.b_g = 2.0 * std::abs(k) * box_radius * rd;
    cs.bounds.l_g = std::abs(k);
  } else if (interaction.name == "sine" || interaction.name == "tanh") {
    const double k = interaction.need("k");
    if (interaction.name == "sine")
      cs.g = [d, k](const double* x, const double* y, double* out) {
        for (std::size_t c = 0; c < d; ++c) out[c] = k * std::sin(y[c] - x[c]);
      };
    else
      cs.g = [d, k](const double* x, const double* y, double* out) {
        for (std::size_t c = 0; c < d; ++c) out[c] = k * std::tanh(y[c] - x[c]);
      };
    cs.bounds.b_g = std::abs(k) * rd;
    cs.bounds.l_g = std::abs(k);
  } else {
    throw ValidationError("unknown interaction family '" + interaction.name + "'");
  }

  if (noise.name == "zero") {
    cs.h = [](const double*, const double*) { return 0.0; };
    cs.h_dependence = YDependence::none;
    cs.h_is_zero = true;
  } else if (noise.name == "constant") {
    const double sigma = noise.need("sigma");
    cs.h = [sigma](const double*, const double*) { return sigma; };
    cs.h_dependence = YDependence::none;
    cs.bounds.b_h = std::abs(sigma);
  } else if (noise.name == "modulated") {
    const double sigma = noise.need("sigma"), beta = noise.need("beta");
    cs.h = [sigma, beta](const double* x, const double* y) { return sigma * (1.0 + beta * std::sin(y[0] - x[0])); };
    cs.bounds.b_h = std::abs(sigma) * (1.0 + std::abs(beta));
    cs.bounds.l_h = std::abs(sigma * beta);
  } else {
    throw ValidationError("unknown noise family '" + noise.name + "'");
  }

  cs.description = drift.name + "/" + interaction.name + "/" + noise.name;
  return cs;
}

// ---------------------------------------------------------------------------
// Empirical check of declared constants

struct BoundsReport {
  DeclaredBounds observed;
  bool pass = true;
  std::vector<std::string> failures;
};

// Monte Carlo over uniform points of the box [lo, hi]^d. Half of the pairs
// are independent, half are local perturbations, so difference quotients
// probe both global and local behaviour.
inline BoundsReport validate_bounds(const CoefficientSet& cs, double lo, double hi, std::size_t samples,
                                    std::uint64_t seed) {
  cs.validate();
  require(samples >= 2, "validate_bounds: need at least 2 samples");
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "validate_bounds: bad box");
  const std::size_t d = cs.d;
  const KeyedRng rng(seed);
  auto draw = [&](std::uint64_t stream, std::uint32_t slot, double* out) {
    for (std::size_t k = 0; k < d; ++k)
      out[k] = lo + (hi - lo) * rng.uniform(RngDomain::validation, stream, slot, static_cast<std::uint32_t>(k));
  };
  auto norm_diff = [d](const double* a, const double* b) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  };
  auto norm = [d](const double* a) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += a[k] * a[k];
    return std::sqrt(s);
  };
  auto point_text = [d](const double* a) {
    std::string s = "(";
    for (std::size_t k = 0; k < d; ++k) s += (k ? "," : "") + std::to_string(a[k]);
    return s + ")";
  };
  auto check_finite = [&](const double* v, std::size_t count, const std::string& what, const double* x,
                          const double* y) {
    for (std::size_t k = 0; k < count; ++k)
      if (!std::isfinite(v[k]))
        throw RuntimeFailure("validate_bounds: " + what + " is not finite at x=" + point_text(x) +
                             (y ? " y=" + point_text(y) : std::string()));
  };

  std::vector<double> x1(d), y1(d), x2(d), y2(d), o1(d), o2(d);
  DeclaredBounds obs;
  for (std::size_t s = 0; s < samples; ++s) {
    draw(s, 0, x1.data());
    draw(s, 1, y1.data());
    if (s % 2 == 0) {
      draw(s, 2, x2.data());
      draw(s, 3, y2.data());
    } else {
      const double scale = 1e-3 * (hi - lo);
      for (std::size_t k = 0; k < d; ++k) {
        x2[k] = std::clamp(x1[k] + scale * (2.0 * rng.uniform(RngDomain::validation, s, 4, static_cast<std::uint32_t>(k)) - 1.0), lo, hi);
        y2[k] = std::clamp(y1[k] + scale * (2.0 * rng.uniform(RngDomain::validation, s, 5, static_cast<std::uint32_t>(k)) - 1.0), lo, hi);
      }
    }
    cs.f(x1.data(), o1.data());
    check_finite(o1.data(), d, "f", x1.data(), nullptr);
    cs.f(x2.data(), o2.data());
    check_finite(o2.data(), d, "f", x2.data(), nullptr);
    obs.b_f = std::max({obs.b_f, norm(o1.data()), norm(o2.data())});
    const double dx = norm_diff(x1.data(), x2.data());
    if (dx > 0.0) obs.l_f = std::max(obs.l_f, norm_diff(o1.data(), o2.data()) / dx);

    const double dxy = dx + norm_diff(y1.data(), y2.data());
    cs.g(x1.data(), y1.data(), o1.data());
    check_finite(o1.data(), d, "g", x1.data(), y1.data());
    cs.g(x2.data(), y2.data(), o2.data());
    check_finite(o2.data(), d, "g", x2.data(), y2.data());
    obs.b_g = std::max({obs.b_g, norm(o1.data()), norm(o2.data())});
    if (dxy > 0.0) obs.l_g = std::max(obs.l_g, norm_diff(o1.data(), o2.data()) / dxy);

    const double h1 = cs.h(x1.data(), y1.data());
    check_finite(&h1, 1, "h", x1.data(), y1.data());
    const double h2 = cs.h(x2.data(), y2.data());
    check_finite(&h2, 1, "h", x2.data(), y2.data());
    obs.b_h = std::max({obs.b_h, std::abs(h1), std::abs(h2)});
    if (dxy > 0.0) obs.l_h = std::max(obs.l_h, std::abs(h1 - h2) / dxy);
  }

  BoundsReport report;
  report.observed = obs;
  constexpr double slack = 1e-12;
  auto judge = [&](const char* name, double seen, double declared) {
    if (seen > declared + slack) {
      report.pass = false;
      report.failures.push_back(std::string(name) + ": observed " + std::to_string(seen) + " > declared " +
                                std::to_string(declared));
    }
  };
  judge("B_f", obs.b_f, cs.bounds.b_f);
  judge("L_f", obs.l_f, cs.bounds.l_f);
  judge("B_g", obs.b_g, cs.bounds.b_g);
  judge("L_g", obs.l_g, cs.bounds.l_g);
  judge("B_h", obs.b_h, cs.bounds.b_h);
  judge("L_h", obs.l_h, cs.bounds.l_h);
  return report;
}

// ---------------------------------------------------------------------------
// Initial laws

enum class InitialFamily { point, uniform, gaussian, gaussian_u };

// Every component is drawn independently with the same one-dimensional law.
// gaussian_u has mean m0 + alpha * u in each component.
struct InitialLaw {
  InitialFamily family = InitialFamily::point;
  double x0 = 0.0;           // point
  double a = 0.0, b = 1.0;   // uniform
  double mean = 0.0;         // gaussian, gaussian_u (m0)
  double variance = 1.0;     // gaussian, gaussian_u
  double alpha = 0.0;        // gaussian_u

  void validate() const {
    switch (family) {
      case InitialFamily::point:
        require(std::isfinite(x0), "point law: x0 must be finite");
        break;
      case InitialFamily::uniform:
        require(std::isfinite(a) && std::isfinite(b) && a < b, "uniform law: need a < b");
        break;
      case InitialFamily::gaussian:
      case InitialFamily::gaussian_u:
        require(std::isfinite(mean) && std::isfinite(variance) && variance >= 0.0,
                "gaussian law: need finite mean and variance >= 0");
        require(std::isfinite(alpha) && alpha >= 0.0, "gaussian_u law: alpha must be >= 0");
        break;
    }
  }

  // Lipschitz constant of u -> law(u) in W2, per component.
  double lipschitz_alpha() const { return family == InitialFamily::gaussian_u ? alpha : 0.0; }

  double mean_at(double u) const {
    switch (family) {
      case InitialFamily::point: return x0;
      case InitialFamily::uniform: return 0.5 * (a + b);
      case InitialFamily::gaussian: return mean;
      case InitialFamily::gaussian_u: return mean + alpha * u;
    }
    return 0.0;
  }

  double variance_at(double) const {
    switch (family) {
      case InitialFamily::point: return 0.0;
      case InitialFamily::uniform: return (b - a) * (b - a) / 12.0;
      case InitialFamily::gaussian:
      case InitialFamily::gaussian_u: return variance;
    }
    return 0.0;
  }
};

inline InitialFamily parse_initial_family(const std::string& s) {
  if (s == "point") return InitialFamily::point;
  if (s == "uniform") return InitialFamily::uniform;
  if (s == "gaussian") return InitialFamily::gaussian;
  if (s == "gaussian_u") return InitialFamily::gaussian_u;
  throw ValidationError("unknown initial law '" + s + "'");
}

// One d-dimensional draw, keyed by (seed, domain, stream).
inline void sample_initial_one(const InitialLaw& law, double u, const KeyedRng& rng, RngDomain domain,
                               std::uint64_t stream, std::size_t d, double* out) {
  for (std::size_t k = 0; k < d; ++k) {
    const auto dim = static_cast<std::uint32_t>(k);
    switch (law.family) {
      case InitialFamily::point:
        out[k] = law.x0;
        break;
      case InitialFamily::uniform:
        out[k] = law.a + (law.b - law.a) * rng.uniform(domain, stream, 0, dim);
        break;
      case InitialFamily::gaussian:
      case InitialFamily::gaussian_u:
        out[k] = law.mean_at(u) + std::sqrt(law.variance) * rng.normal(domain, stream, 0, dim);
        break;
    }
  }
}

// count i.i.d. draws at label u, row-major count x d.
inline std::vector<double> sample_initial(const InitialLaw& law, double u, std::size_t count, std::uint64_t seed,
                                          std::size_t d = 1) {
  law.validate();
  require(count >= 1, "sample_initial: count must be >= 1");
  const KeyedRng rng(seed);
  std::vector<double> out(count * d);
  for (std::size_t i = 0; i < count; ++i)
    sample_initial_one(law, u, rng, RngDomain::particle_initial, i, d, out.data() + i * d);
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form constants

struct ConstantsReport {
  double norm_eta = 0.0, norm_eta_hat = 0.0, t_final = 0.0, growth = 0.0;
  double c_picard = 0.0;
  double c1_hat = 0.0, c2_hat = 0.0;
  double c1 = 0.0, c2 = 0.0;
  double c_compare = 0.0;
  double c_u = 0.0;
  // Products c1_hat * c2_hat and c1 * c2, which stay finite when the
  // denominators of c2_hat, c2 vanish.
  double c12_hat = 0.0, c12 = 0.0;
};

inline ConstantsReport theoretical_constants(const DeclaredBounds& k, double norm_eta, double norm_eta_hat,
                                             double t_final, double growth) {
  require(t_final > 0.0 && std::isfinite(t_final), "theoretical_constants: T must be > 0");
  require(norm_eta >= 0.0 && norm_eta_hat >= 0.0 && growth >= 0.0, "theoretical_constants: negative input");
  const double e2 = norm_eta * norm_eta, h2 = norm_eta_hat * norm_eta_hat, T = t_final;
  const double bg2 = k.b_g * k.b_g, bh2 = k.b_h * k.b_h;
  const double lf2 = k.l_f * k.l_f, lg2 = k.l_g * k.l_g, lh2 = k.l_h * k.l_h;

  ConstantsReport r;
  r.norm_eta = norm_eta;
  r.norm_eta_hat = norm_eta_hat;
  r.t_final = T;
  r.growth = growth;
  r.c_picard = 12.0 * (lf2 + lg2 * e2 + lh2 * h2);

  const double den_hat = 2.0 * bg2 * e2 + 3.0 * bh2 * h2;
  const double exp_hat = std::exp((3.0 * lf2 + 3.0 * (2.0 * lg2 * e2 + 3.0 * lh2 * h2)) * T);
  r.c1_hat = 3.0 * den_hat * exp_hat;
  r.c2_hat = den_hat > 0.0 ? 3.0 * bh2 * T / den_hat : 0.0;
  r.c12_hat = 9.0 * bh2 * T * exp_hat;

  const double den = 3.0 * bg2 * e2 + 2.0 * bh2 * h2;
  const double exp_eta = std::exp((3.0 * lf2 + 3.0 * (3.0 * lg2 * e2 + 2.0 * lh2 * h2)) * T);
  r.c1 = 3.0 * den * exp_eta;
  r.c2 = den > 0.0 ? 3.0 * bg2 * T / den : 0.0;
  r.c12 = 9.0 * bg2 * T * exp_eta;

  r.c_compare = 48.0 * T * std::exp((16.0 * lf2 + 96.0 * (lg2 + lh2) * growth) * T);
  r.c_u = 16.0 * std::exp(16.0 * (lf2 + 2.0 * lg2 * e2 + 2.0 * lh2 * h2) * T);
  return r;
}

// Squared W2 bound between solutions for noise graphs at d_inf distance dinf.
inline double noise_perturbation_bound(const ConstantsReport& r, double dinf) {
  const double base = r.c12_hat * dinf * dinf;
  return base == 0.0 ? 0.0 : base * std::exp(r.c1_hat * r.t_final);
}

// Squared W2 bound between solutions for drift graphs at d_inf distance dinf.
inline double drift_perturbation_bound(const ConstantsReport& r, double dinf) {
  const double base = r.c12 * dinf * dinf;
  return base == 0.0 ? 0.0 : base * std::exp(r.c1 * r.t_final);
}

// Bound on (1/N) sum_i E sup_t |X_i - X_{i/N}|^2.
inline double coupling_bound(const ConstantsReport& r, const DeclaredBounds& k, std::size_t n,
                             double initial_mismatch, double dinf_drift, double dinf_noise) {
  const double bg2 = k.b_g * k.b_g, bh2 = k.b_h * k.b_h;
  const double inner = 16.0 * initial_mismatch + 2.0 / static_cast<double>(n) * (bg2 + bh2) * r.growth +
                       bg2 * dinf_drift * dinf_drift + bh2 * dinf_noise * dinf_noise;
  return inner == 0.0 ? 0.0 : r.c_compare * inner;
}

// Bound on E sup_t |X_{u1} - X_{u2}|^2 from the initial-law gap and fiber gaps.
inline double u_continuity_bound(const ConstantsReport& r, const DeclaredBounds& k, double w2_initial,
                                 double dbl_drift, double dbl_noise) {
  const double inner = w2_initial * w2_initial +
                       2.0 * r.t_final * (k.b_g * k.b_g * dbl_drift * dbl_drift + k.b_h * k.b_h * dbl_noise * dbl_noise);
  return inner == 0.0 ? 0.0 : r.c_u * inner;
}

}  // namespace dgmlab
