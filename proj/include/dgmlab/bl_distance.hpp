#pragma once

// Bounded-Lipschitz (flat) distance between finite positive measures on [0,1]:
//
//   d_BL(mu, nu) = sup { int f d(mu - nu) : ||f||_inf + Lip(f) <= 1 }.
//
// Only the values of f at the atoms matter. For a fixed split
// ||f||_inf <= 1 - L, Lip(f) <= L the problem on sorted atoms is a chain LP
//
//   max sum_p c_p f_p   s.t.  |f_p| <= 1 - L,  |f_{p+1} - f_p| <= L * gap_p,
//
// whose optimal value V(L) is concave in L. bl_distance solves the chain LP
// exactly with a dynamic program over concave piecewise-linear value
// functions and maximizes V over L by golden-section search.
// bl_distance_oracle solves the joint LP in (f, L) with every pairwise
// constraint by dense simplex; it shares no code with the chain route.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <vector>

#include "dgmlab/error.hpp"
#include "dgmlab/lp.hpp"
#include "dgmlab/measure1d.hpp"

namespace dgmlab {

namespace detail {

// Signed difference mu - nu on the union of supports, zero entries dropped.
struct SignedAtoms {
  std::vector<double> positions;
  std::vector<double> charge;
};

inline SignedAtoms signed_difference(const DiscreteMeasure1D& mu, const DiscreteMeasure1D& nu) {
  SignedAtoms out;
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  std::size_t i = 0, j = 0;
  auto push = [&](double x, double w) {
    if (w == 0.0) return;
    out.positions.push_back(x);
    out.charge.push_back(w);
  };
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].position < b[j].position)) {
      push(a[i].position, a[i].weight);
      ++i;
    } else if (i == a.size() || b[j].position < a[i].position) {
      push(b[j].position, -b[j].weight);
      ++j;
    } else {
      push(a[i].position, a[i].weight - b[j].weight);
      ++i;
      ++j;
    }
  }
  return out;
}

// Concave piecewise-linear value function on [-s, s], stored around its
// argmax: segments run outward from the peak on each side. Slopes are kept
// raw with one shared offset so adding a linear term costs O(1).
class ConcaveChain {
 public:
  explicit ConcaveChain(double bound) : peak_x_(-bound) { right_.push_back({2.0 * bound, 0.0}); }

  double peak() const { return peak_y_; }

  // Adds c * x, then walks the peak to the new argmax.
  void add_linear(double c) {
    peak_y_ += c * peak_x_;
    offset_ += c;
    while (!right_.empty() && right_.front().raw + offset_ > 0.0) {
      const Segment seg = right_.front();
      right_.pop_front();
      peak_x_ += seg.length;
      peak_y_ += (seg.raw + offset_) * seg.length;
      left_.push_front(seg);
    }
    while (!left_.empty() && left_.front().raw + offset_ < 0.0) {
      const Segment seg = left_.front();
      left_.pop_front();
      peak_x_ -= seg.length;
      peak_y_ -= (seg.raw + offset_) * seg.length;
      right_.push_front(seg);
    }
  }

  // x -> max over |x' - x| <= w, restricted back to [-s, s].
  void dilate(double w) {
    if (w <= 0.0) return;
    // Left part shifts by -w, right part by +w, flat top of width 2w between.
    peak_x_ -= w;
    right_.push_front({2.0 * w, -offset_});
    trim_back(right_, w);
    const double spill = trim_back(left_, w);
    // Peak left of -s: it moves right along the right side.
    double r = spill;
    while (r > 0.0 && !right_.empty()) {
      Segment& seg = right_.front();
      const double take = std::min(r, seg.length);
      peak_x_ += take;
      peak_y_ += (seg.raw + offset_) * take;
      seg.length -= take;
      r -= take;
      if (seg.length <= 0.0) right_.pop_front();
    }
  }

 private:
  struct Segment {
    double length;
    double raw;
  };

  // Removes up to `amount` of length from the outer end; returns the shortfall.
  static double trim_back(std::deque<Segment>& side, double amount) {
    while (amount > 0.0 && !side.empty()) {
      Segment& seg = side.back();
      if (seg.length <= amount) {
        amount -= seg.length;
        side.pop_back();
      } else {
        seg.length -= amount;
        amount = 0.0;
      }
    }
    return amount;
  }

  double peak_x_;
  double peak_y_ = 0.0;
  double offset_ = 0.0;
  std::deque<Segment> left_;
  std::deque<Segment> right_;
};

// Optimal value of the chain LP for one split (bound = 1 - L, lip = L).
inline double chain_lp_value(const std::vector<double>& gaps, const std::vector<double>& charge,
                             double bound, double lip) {
  if (bound <= 0.0 || charge.empty()) return 0.0;
  ConcaveChain value(bound);
  value.add_linear(charge[0]);
  for (std::size_t p = 1; p < charge.size(); ++p) {
    value.dilate(lip * gaps[p - 1]);
    value.add_linear(charge[p]);
  }
  return value.peak();
}

// Joint LP in (f, L) over an arbitrary distance matrix. Variables are
// shifted to g_p = f_p + 1 >= 0 so the origin is feasible.
inline double bl_dual_lp(const std::vector<double>& dist, const std::vector<double>& charge) {
  const std::size_t p_count = charge.size();
  if (p_count == 0) return 0.0;
  const std::size_t n = p_count + 1;
  const std::size_t lip = p_count;
  const std::size_t m = 2 * p_count + p_count * (p_count - 1);
  std::vector<double> a(m * n, 0.0), b(m, 0.0), c(n, 0.0);
  std::size_t row = 0;
  for (std::size_t p = 0; p < p_count; ++p) {
    a[row * n + p] = 1.0;
    a[row * n + lip] = 1.0;
    b[row++] = 2.0;
    a[row * n + p] = -1.0;
    a[row * n + lip] = 1.0;
    b[row++] = 0.0;
  }
  for (std::size_t p = 0; p < p_count; ++p) {
    for (std::size_t q = 0; q < p_count; ++q) {
      if (p == q) continue;
      a[row * n + p] = 1.0;
      a[row * n + q] = -1.0;
      a[row * n + lip] = -dist[p * p_count + q];
      b[row++] = 0.0;
    }
  }
  double offset = 0.0;
  for (std::size_t p = 0; p < p_count; ++p) {
    c[p] = charge[p];
    offset += charge[p];
  }
  const auto result = solve_lp(m, n, a, b, c);
  if (result.status != LpStatus::optimal) throw RuntimeFailure("bl_dual_lp: LP not optimal");
  return std::max(0.0, result.value - offset);
}

}  // namespace detail

inline double bl_distance(const DiscreteMeasure1D& mu, const DiscreteMeasure1D& nu) {
  const auto diff = detail::signed_difference(mu, nu);
  const std::size_t count = diff.charge.size();
  if (count == 0) return 0.0;
  std::vector<double> gaps(count > 0 ? count - 1 : 0);
  for (std::size_t p = 0; p + 1 < count; ++p) gaps[p] = diff.positions[p + 1] - diff.positions[p];

  auto value = [&](double lip) { return detail::chain_lp_value(gaps, diff.charge, 1.0 - lip, lip); };

  double best = value(0.0);
  if (count == 1) return best;
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double v1 = value(x1), v2 = value(x2);
  for (int iter = 0; iter < 90 && hi - lo > 1e-15; ++iter) {
    if (v1 < v2) {
      lo = x1;
      x1 = x2;
      v1 = v2;
      x2 = lo + kInvPhi * (hi - lo);
      v2 = value(x2);
    } else {
      hi = x2;
      x2 = x1;
      v2 = v1;
      x1 = hi - kInvPhi * (hi - lo);
      v1 = value(x1);
    }
  }
  best = std::max({best, v1, v2, value(0.5 * (lo + hi))});
  return std::max(0.0, best);
}

inline constexpr std::size_t kBlOracleMaxAtoms = 64;

// Ground truth for tests; refuses more than 64 atoms in total.
inline double bl_distance_oracle(const DiscreteMeasure1D& mu, const DiscreteMeasure1D& nu) {
  if (mu.size() + nu.size() > kBlOracleMaxAtoms)
    throw UnsupportedError("bl_distance_oracle: more than 64 atoms");
  const auto diff = detail::signed_difference(mu, nu);
  const std::size_t count = diff.charge.size();
  std::vector<double> dist(count * count);
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t q = 0; q < count; ++q)
      dist[p * count + q] = std::abs(diff.positions[p] - diff.positions[q]);
  return detail::bl_dual_lp(dist, diff.charge);
}

}  // namespace dgmlab
