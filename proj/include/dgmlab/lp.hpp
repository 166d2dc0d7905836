#pragma once

// Dense tableau simplex for small linear programs:
//
//   maximize c.x  subject to  A x <= b,  x >= 0.
//
// Negative right-hand sides are handled by a phase-1 artificial variable.
// Pivoting runs on a right-hand side relaxed by tiny distinct amounts, which
// removes the degeneracy of transport and Lipschitz-type systems. The original
// right-hand side rides along as an extra column, so the reported value and
// point belong to the final basis evaluated at the unperturbed data.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "dgmlab/error.hpp"

namespace dgmlab {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  std::vector<double> x;
};

class DenseSimplex {
 public:
  // a is row-major m x n.
  DenseSimplex(std::size_t m, std::size_t n, const std::vector<double>& a,
               const std::vector<double>& b, const std::vector<double>& c)
      : m_(m), n_(n), cols_(n + 3), d_((m + 2) * (n + 3), 0.0), basis_(m), nonbasis_(n + 1) {
    require(a.size() == m * n && b.size() == m && c.size() == n, "DenseSimplex: shape mismatch");
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) at(i, j) = a[i * n + j];
      at(i, n) = -1.0;
      at(i, n + 1) = b[i] + perturbation(i);
      at(i, n + 2) = b[i];
      basis_[i] = static_cast<long>(n + i);
    }
    for (std::size_t j = 0; j < n; ++j) {
      at(m, j) = -c[j];
      nonbasis_[j] = static_cast<long>(j);
    }
    nonbasis_[n] = -1;
    at(m + 1, n) = 1.0;
  }

  LpResult solve() {
    LpResult result;
    std::size_t r = 0;
    for (std::size_t i = 1; i < m_; ++i)
      if (at(i, n_ + 1) < at(r, n_ + 1)) r = i;
    if (m_ > 0 && at(r, n_ + 1) < -kEps) {
      pivot(r, n_);
      if (!run(1) || at(m_ + 1, n_ + 1) < -kEps) {
        result.status = LpStatus::infeasible;
        return result;
      }
      for (std::size_t i = 0; i < m_; ++i) {
        if (basis_[i] != -1) continue;
        std::size_t s = 0;
        for (std::size_t j = 1; j <= n_; ++j)
          if (at(i, j) < at(i, s) || (at(i, j) == at(i, s) && nonbasis_[j] < nonbasis_[s])) s = j;
        pivot(i, s);
      }
    }
    if (!run(2)) {
      result.status = LpStatus::unbounded;
      result.value = std::numeric_limits<double>::infinity();
      return result;
    }
    result.status = LpStatus::optimal;
    result.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= 0 && static_cast<std::size_t>(basis_[i]) < n_)
        result.x[static_cast<std::size_t>(basis_[i])] = std::max(0.0, at(i, n_ + 2));
    result.value = at(m_, n_ + 2);
    return result;
  }

 private:
  static constexpr double kEps = 1e-11;
  static constexpr double kPerturb = 1e-7;
  // Column entries below this are treated as zero in the ratio test.
  static constexpr double kPivotEps = 1e-9;
  static constexpr std::size_t kMaxPivots = 200000;
  static constexpr std::size_t kDegenerateRun = 25;

  double& at(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }

  static double perturbation(std::size_t i) {
    std::uint64_t z = static_cast<std::uint64_t>(i) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return kPerturb * (1.0 + static_cast<double>(z >> 11) * 0x1.0p-53);
  }

  void pivot(std::size_t r, std::size_t s) {
    const double inv = 1.0 / at(r, s);
    for (std::size_t i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      const double factor = at(i, s) * inv;
      if (factor == 0.0) continue;
      double* row = &d_[i * cols_];
      const double* prow = &d_[r * cols_];
      for (std::size_t j = 0; j < cols_; ++j)
        if (j != s) row[j] -= prow[j] * factor;
      row[s] = -factor;
    }
    for (std::size_t j = 0; j < cols_; ++j)
      if (j != s) at(r, j) *= inv;
    at(r, s) = inv;
    std::swap(basis_[r], nonbasis_[s]);
  }

  bool run(int phase) {
    const std::size_t obj = phase == 1 ? m_ + 1 : m_;
    std::size_t degenerate = 0;
    for (std::size_t iter = 0; iter < kMaxPivots; ++iter) {
      const bool bland = degenerate >= kDegenerateRun;
      long s = -1;
      for (std::size_t j = 0; j <= n_; ++j) {
        if (phase == 2 && nonbasis_[j] == -1) continue;
        const double rc = at(obj, j);
        if (rc >= -kEps) continue;
        if (s < 0) {
          s = static_cast<long>(j);
          continue;
        }
        const double best = at(obj, static_cast<std::size_t>(s));
        if (bland) {
          if (nonbasis_[j] < nonbasis_[static_cast<std::size_t>(s)]) s = static_cast<long>(j);
        } else if (rc < best || (rc == best && nonbasis_[j] < nonbasis_[static_cast<std::size_t>(s)])) {
          s = static_cast<long>(j);
        }
      }
      if (s < 0) return true;
      const auto col = static_cast<std::size_t>(s);
      long r = -1;
      for (std::size_t i = 0; i < m_; ++i) {
        if (at(i, col) <= kPivotEps) continue;
        if (r < 0) {
          r = static_cast<long>(i);
          continue;
        }
        const auto ri = static_cast<std::size_t>(r);
        const double lhs = at(i, n_ + 1) / at(i, col);
        const double rhs = at(ri, n_ + 1) / at(ri, col);
        if (lhs < rhs || (lhs == rhs && basis_[i] < basis_[ri])) r = static_cast<long>(i);
      }
      if (r < 0) return false;
      const auto row = static_cast<std::size_t>(r);
      degenerate = at(row, n_ + 1) <= kEps ? degenerate + 1 : 0;
      pivot(row, col);
    }
    throw RuntimeFailure("DenseSimplex: pivot limit reached");
  }

  std::size_t m_, n_, cols_;
  std::vector<double> d_;
  std::vector<long> basis_;
  std::vector<long> nonbasis_;
};

inline LpResult solve_lp(std::size_t m, std::size_t n, const std::vector<double>& a,
                         const std::vector<double>& b, const std::vector<double>& c) {
  return DenseSimplex(m, n, a, b, c).solve();
}

}  // namespace dgmlab
