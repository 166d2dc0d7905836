#include <gtest/gtest.h>

#include <cmath>

#include "dgmlab/metrics.hpp"
#include "dgmlab/rng.hpp"

using namespace dgmlab;

namespace {

EmpiricalMeasure random_cloud(std::size_t count, std::size_t d, std::uint64_t seed, double lo = -1.0,
                              double hi = 1.0) {
  const KeyedRng rng(seed);
  std::vector<double> pts(count * d);
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i] = lo + (hi - lo) * rng.uniform(RngDomain::validation, i, 0, 0);
  return EmpiricalMeasure::uniform(d, std::move(pts));
}

EmpiricalMeasure shifted(const EmpiricalMeasure& m, double c) {
  auto pts = m.points();
  for (auto& x : pts) x += c;
  return {m.dim(), std::move(pts), m.weights()};
}

PathEnsemble constant_paths(const std::vector<double>& values, const TimeGrid& grid) {
  PathEnsemble ens(values.size(), 1, grid);
  for (std::size_t p = 0; p < values.size(); ++p)
    for (std::size_t k = 0; k <= grid.steps; ++k) ens.state(p, k)[0] = values[p];
  return ens;
}

}  // namespace

TEST(Wasserstein, OneDimensionalMatchesLp) {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto mu = random_cloud(7 + s, 1, s);
    const auto nu = random_cloud(11, 1, 100 + s, -0.5, 2.0);
    EXPECT_NEAR(wasserstein2_1d(mu, nu), wasserstein2_lp(mu, nu), 1e-9);
  }
}

TEST(Wasserstein, ShiftGivesShiftDistance) {
  const auto mu = random_cloud(20, 1, 3);
  EXPECT_NEAR(wasserstein2_1d(mu, shifted(mu, 0.4)), 0.4, 1e-12);
  const auto m2 = random_cloud(10, 2, 4);
  EXPECT_NEAR(wasserstein2_lp(m2, shifted(m2, 0.25)), 0.25 * std::sqrt(2.0), 1e-9);
  EXPECT_EQ(wasserstein2_1d(mu, mu), 0.0);
}

TEST(Wasserstein, DiracPair) {
  const EmpiricalMeasure a(1, {0.0}, {1.0});
  const EmpiricalMeasure b(1, {0.0, 2.0}, {0.5, 0.5});
  EXPECT_NEAR(wasserstein2_1d(a, b), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(wasserstein2_lp(a, b), std::sqrt(2.0), 1e-9);
}

TEST(Wasserstein, LimitsAndShapeChecks) {
  EXPECT_THROW(wasserstein2_lp(random_cloud(33, 1, 1), random_cloud(3, 1, 2)), UnsupportedError);
  EXPECT_THROW(wasserstein2_1d(random_cloud(3, 2, 1), random_cloud(3, 2, 2)), ValidationError);
  EXPECT_THROW(wasserstein2_1d(random_cloud(3, 1, 1), random_cloud(3, 2, 2)), ValidationError);
  EXPECT_THROW(EmpiricalMeasure(1, {0.0, NAN}, {0.5, 0.5}), ValidationError);
}

TEST(BoundedLipschitz, RdAgreesWithLineAlgorithm) {
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const auto mu = random_cloud(9, 1, s, 0.0, 1.0);
    const auto nu = random_cloud(6, 1, 50 + s, 0.0, 1.0);
    std::vector<Atom> a, b;
    for (std::size_t i = 0; i < mu.size(); ++i) a.push_back({mu.point(i)[0], mu.weight(i)});
    for (std::size_t i = 0; i < nu.size(); ++i) b.push_back({nu.point(i)[0], nu.weight(i)});
    EXPECT_NEAR(bl_distance_rd(mu, nu), bl_distance(DiscreteMeasure1D(a), DiscreteMeasure1D(b)), 1e-9);
  }
}

TEST(BoundedLipschitz, BoundedByW2AndByTotalVariation) {
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const auto mu = random_cloud(8, 2, s);
    const auto nu = random_cloud(8, 2, 20 + s);
    const double bl = bl_distance_rd(mu, nu);
    EXPECT_LE(bl, wasserstein2_lp(mu, nu) + 1e-9);
    EXPECT_LE(bl, 2.0 + 1e-12);
    EXPECT_GE(bl, 0.0);
  }
  const auto mu = random_cloud(5, 3, 7);
  EXPECT_EQ(bl_distance_rd(mu, mu), 0.0);
  EXPECT_THROW(bl_distance_rd(random_cloud(65, 1, 1), random_cloud(2, 1, 1)), UnsupportedError);
}

TEST(BoundedLipschitz, DiracPairClosedForm) {
  // Under ||f||_inf + Lip(f) <= 1 two unit Diracs at distance r give 2r / (2 + r).
  const EmpiricalMeasure a(2, {0.0, 0.0}, {1.0});
  const EmpiricalMeasure b(2, {0.3, 0.4}, {1.0});
  EXPECT_NEAR(bl_distance_rd(a, b), 1.0 / 2.5, 1e-9);
  const EmpiricalMeasure far(2, {30.0, 40.0}, {1.0});
  EXPECT_NEAR(bl_distance_rd(a, far), 100.0 / 52.0, 1e-9);
}

TEST(PathDistances, ShiftGivesSquaredShift) {
  const TimeGrid grid(1.0, 4);
  const auto a = constant_paths({0.0, 1.0, -2.0}, grid);
  const auto b = constant_paths({0.5, 1.5, -1.5}, grid);
  EXPECT_NEAR(path_sup_distance_sq(CoupledPairs(a, b), 4), 0.25, 1e-15);
  EXPECT_EQ(path_sup_distance_sq(CoupledPairs(a, a), 4), 0.0);
  EXPECT_THROW(path_sup_distance_sq(CoupledPairs(a, b), 5), ValidationError);
  EXPECT_THROW(CoupledPairs(a, constant_paths({0.0}, grid)), ValidationError);
}

TEST(PathDistances, RunningSupIsMonotoneInTime) {
  const TimeGrid grid(1.0, 10);
  PathEnsemble a(2, 1, grid), b(2, 1, grid);
  for (std::size_t k = 0; k <= 10; ++k) {
    a.state(0, k)[0] = std::sin(static_cast<double>(k));
    a.state(1, k)[0] = std::cos(0.7 * static_cast<double>(k));
  }
  double prev = 0.0;
  for (std::size_t k = 0; k <= 10; ++k) {
    const double v = path_sup_distance_sq(CoupledPairs(a, b), k);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Aggregation, WnModes) {
  EXPECT_DOUBLE_EQ(wn_aggregate({3.0, 4.0}, WnMode::inf), 4.0);
  EXPECT_DOUBLE_EQ(wn_aggregate({3.0, 4.0}, WnMode::l2), std::sqrt(12.5));
  EXPECT_DOUBLE_EQ(wn_aggregate({0.2, 0.2, 0.2}, WnMode::l2), 0.2);
  EXPECT_THROW(wn_aggregate({}, WnMode::l2), ValidationError);
  EXPECT_THROW(wn_aggregate({-1.0}, WnMode::l2), ValidationError);
}
