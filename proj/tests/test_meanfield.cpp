#include <gtest/gtest.h>

#include <cmath>

#include "dgmlab/meanfield.hpp"

using namespace dgmlab;

namespace {

CoefficientSet coeffs(const FamilySpec& f, const FamilySpec& g, const FamilySpec& h) {
  return build_coefficients(f, g, h, 1, 10.0);
}

InitialLaw gaussian(double mean, double var) {
  InitialLaw law;
  law.family = InitialFamily::gaussian;
  law.mean = mean;
  law.variance = var;
  return law;
}

PicardOptions options(std::size_t u_points, std::size_t samples, std::size_t max_iter = 20, double tol = 1e-6) {
  PicardOptions o;
  o.u_grid = midpoint_grid(u_points);
  o.samples = samples;
  o.max_iter = max_iter;
  o.tol = tol;
  o.seed = 5;
  return o;
}

double variance(const EmpiricalMeasure& mu) {
  const double m = mu.integrate([](const double* x) { return x[0]; });
  return mu.integrate([m](const double* x) { return (x[0] - m) * (x[0] - m); });
}

}  // namespace

TEST(MeanFieldGrid, MidpointsAndNearest) {
  const auto g = midpoint_grid(4);
  EXPECT_DOUBLE_EQ(g[0], 0.125);
  EXPECT_DOUBLE_EQ(g[3], 0.875);
  EXPECT_EQ(nearest_index(g, 0.25), 0u);  // tie goes to the lower index
  EXPECT_EQ(nearest_index(g, 0.26), 1u);
  EXPECT_EQ(nearest_index(g, 1.0), 3u);
  const auto w = aggregate_fiber(DiscreteMeasure1D({{0.1, 0.5}, {0.2, 0.25}, {0.9, 1.0}}), g);
  EXPECT_DOUBLE_EQ(w[0], 0.75);
  EXPECT_DOUBLE_EQ(w[1], 0.0);
  EXPECT_DOUBLE_EQ(w[3], 1.0);
  EXPECT_THROW(midpoint_grid(0), ValidationError);
}

TEST(MeanField, NoInteractionConvergesAtSecondIterate) {
  // With g = h = 0 the law never enters, so iterate 2 repeats iterate 1.
  const auto cs = coeffs({"linear", {{"rate", -1.0}}}, {"zero", {}}, {"zero", {}});
  const auto eta = dgm_limit(GraphSpec{}, 8);
  const TimeGrid grid(1.0, 50);
  const auto sol = picard_solve(eta, eta, cs, gaussian(1.0, 0.5), grid, options(3, 200));
  ASSERT_EQ(sol.iteration_log.size(), 2u);
  EXPECT_GT(sol.iteration_log[0].distance, 0.1);
  EXPECT_EQ(sol.iteration_log[1].distance, 0.0);
  EXPECT_TRUE(sol.converged);
  // Each path is the Euler flow of x' = -x.
  const double factor = std::pow(1.0 - grid.dt(), 50);
  for (const auto& e : sol.ensembles)
    for (std::size_t m = 0; m < e.paths; ++m) EXPECT_NEAR(e.state(m, 50)[0], e.state(m, 0)[0] * factor, 1e-12);
}

TEST(MeanField, ConstantNoiseVarianceGrowsLinearly) {
  const auto cs = coeffs({"zero", {}}, {"zero", {}}, {"constant", {{"sigma", 0.8}}});
  const auto eta = dgm_limit(GraphSpec{}, 8);
  const auto sol = picard_solve(eta, eta, cs, gaussian(0.0, 0.25), {2.0, 40}, options(2, 4000));
  for (std::size_t q = 0; q < 2; ++q) {
    const double v = variance(sol.law(q, 40));
    const double expected = 0.25 + 0.64 * 2.0;
    // Sample variance of a Gaussian: sd = var * sqrt(2 / M).
    EXPECT_NEAR(v, expected, 4.0 * expected * std::sqrt(2.0 / 4000.0));
  }
}

TEST(MeanField, LinearInteractionPreservesMean) {
  // Complete graph, g = k(y - x), no noise: the pooled mean is invariant.
  const auto cs = coeffs({"zero", {}}, {"linear", {{"k", 1.0}}}, {"zero", {}});
  const auto eta = dgm_limit(GraphSpec{}, 16);
  auto law = gaussian(0.5, 0.2);
  law.family = InitialFamily::gaussian_u;
  law.alpha = 1.0;
  const auto sol = picard_solve(eta, eta, cs, law, {1.0, 40}, options(4, 2000, 30, 1e-8));
  EXPECT_TRUE(sol.converged);
  double pooled0 = 0.0, pooled1 = 0.0;
  for (std::size_t q = 0; q < 4; ++q) {
    pooled0 += sol.law(q, 0).integrate([](const double* x) { return x[0]; }) / 4.0;
    pooled1 += sol.law(q, 40).integrate([](const double* x) { return x[0]; }) / 4.0;
  }
  EXPECT_NEAR(pooled1, pooled0, 1e-9);
  // Labels are pulled toward the pooled mean: the spread across labels shrinks.
  const auto w0 = adjacent_law_w2(sol, 0), w1 = adjacent_law_w2(sol, 40);
  for (std::size_t q = 0; q < w0.size(); ++q) EXPECT_LT(w1[q], w0[q]);
}

TEST(MeanField, PicardDistancesContract) {
  const auto cs = coeffs({"saturating", {{"rate", 1.0}}}, {"sine", {{"k", 1.0}}}, {"constant", {{"sigma", 0.5}}});
  const auto eta = dgm_limit(GraphSpec{}, 8);
  const auto sol = picard_solve(eta, eta, cs, gaussian(0.0, 1.0), {1.0, 40}, options(2, 150, 8, 1e-12));
  EXPECT_FALSE(sol.converged);
  ASSERT_EQ(sol.iteration_log.size(), 8u);
  for (std::size_t n = 2; n < 6; ++n) EXPECT_LT(sol.iteration_log[n].distance, sol.iteration_log[n - 1].distance);
}

TEST(MeanField, DeterministicAcrossWorkers) {
  const auto cs = coeffs({"saturating", {{"rate", 1.0}}}, {"tanh", {{"k", 0.5}}},
                         {"modulated", {{"sigma", 0.4}, {"beta", 0.5}}});
  GraphSpec ring;
  ring.family = GraphFamily::ring;
  const auto eta = dgm_limit(ring, 4);
  auto o = options(4, 100, 3);
  const auto a = picard_solve(eta, eta, cs, gaussian(0.0, 1.0), {1.0, 10}, o);
  o.workers = 3;
  const auto b = picard_solve(eta, eta, cs, gaussian(0.0, 1.0), {1.0, 10}, o);
  for (std::size_t q = 0; q < 4; ++q) EXPECT_EQ(a.ensembles[q].states, b.ensembles[q].states);
}

TEST(MeanField, InvalidOptions) {
  const auto cs = coeffs({"zero", {}}, {"zero", {}}, {"zero", {}});
  const auto eta = dgm_limit(GraphSpec{}, 4);
  auto o = options(2, 1);
  EXPECT_THROW(picard_solve(eta, eta, cs, InitialLaw{}, {1.0, 2}, o), ValidationError);
  o = options(2, 10);
  o.u_grid = {0.5, 0.2};
  EXPECT_THROW(picard_solve(eta, eta, cs, InitialLaw{}, {1.0, 2}, o), ValidationError);
  o = options(2, 10);
  o.tol = 0.0;
  EXPECT_THROW(picard_solve(eta, eta, cs, InitialLaw{}, {1.0, 2}, o), ValidationError);
}

TEST(Barmu, PoolsLabelsWithEqualWeight) {
  MeanFieldSolution sol;
  sol.grid = TimeGrid(1.0, 1);
  sol.u_grid = {0.25, 0.75};
  sol.ensembles.assign(2, PathEnsemble(3, 1, sol.grid));
  for (std::size_t m = 0; m < 3; ++m) {
    sol.ensembles[1].state(m, 0)[0] = 1.0;
    sol.ensembles[1].state(m, 1)[0] = 1.0;
  }
  const auto mu = barmu(sol, 1);
  EXPECT_NEAR(mu.integrate([](const double* x) { return x[0]; }), 0.5, 1e-15);
  const EmpiricalMeasure target(1, {0.0, 1.0}, {0.5, 0.5});
  // Weights 1/6 leave a ~1e-17 mass residue that the square root lifts to ~1e-8.
  EXPECT_NEAR(wasserstein2_1d(mu, target), 0.0, 1e-7);
  EXPECT_NEAR(adjacent_law_w2(sol, 0)[0], 1.0, 1e-15);
}

TEST(Coupling, IdenticalAndShiftedEnsembles) {
  const TimeGrid grid(1.0, 3);
  PathEnsemble a(4, 1, grid);
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t k = 0; k <= 3; ++k) a.state(p, k)[0] = static_cast<double>(p * k);
  PathEnsemble b = a;
  EXPECT_EQ(coupling_error(a, b).mean, 0.0);
  for (auto& x : b.states) x += 0.3;
  const auto r = coupling_error(a, b);
  EXPECT_NEAR(r.mean, 0.09, 1e-15);
  EXPECT_TRUE(std::isnan(r.bound));
  const auto cells = coupling_per_cell(r, {0.25, 0.5, 0.75, 1.0}, {0.25, 0.75});
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_NEAR(cells[0], 0.3, 1e-15);
}

TEST(Representatives, MatchParticlesWithoutInteraction) {
  // Complete graph, constant noise and no interaction: particle i and its
  // representative solve the same SDE with the same noise.
  const auto cs = coeffs({"linear", {{"rate", -0.5}}}, {"zero", {}}, {"constant", {{"sigma", 0.6}}});
  const auto eta = dgm_limit(GraphSpec{}, 64);
  const TimeGrid grid(1.0, 20);
  const auto sol = picard_solve(eta, eta, cs, gaussian(0.0, 1.0), grid, options(4, 50));
  const auto particles = simulate_particles(generate_graph(GraphSpec{}, 16, 3), cs, gaussian(0.0, 1.0), grid, 3);
  const auto reps = simulate_representatives(eta, eta, cs, sol, particles);
  EXPECT_EQ(reps.labels, particles.labels);
  for (std::size_t i = 0; i < reps.states.size(); ++i) EXPECT_NEAR(reps.states[i], particles.states[i], 1e-12);
  EXPECT_LT(coupling_error(particles, reps).mean, 1e-20);
}

TEST(Representatives, GridMismatchThrows) {
  const auto cs = coeffs({"zero", {}}, {"zero", {}}, {"zero", {}});
  const auto eta = dgm_limit(GraphSpec{}, 4);
  const auto sol = picard_solve(eta, eta, cs, InitialLaw{}, {1.0, 10}, options(2, 10));
  const auto particles = simulate_particles(generate_graph(GraphSpec{}, 4, 1), cs, InitialLaw{}, {1.0, 20}, 1);
  EXPECT_THROW(simulate_representatives(eta, eta, cs, sol, particles), ValidationError);
  EXPECT_THROW(simulate_representatives(eta, eta, cs, MeanFieldSolution{}, particles), ValidationError);
}

TEST(WeakForm, ControlVariateResidualIsFirstOrderInDt) {
  const auto cs = coeffs({"linear", {{"rate", -1.0}}}, {"linear", {{"k", 1.0}}}, {"constant", {{"sigma", 0.5}}});
  const auto eta = dgm_limit(GraphSpec{}, 8);
  double prev = 0.0;
  for (std::size_t steps : {25u, 50u, 100u}) {
    const TimeGrid grid(1.0, steps);
    const auto sol = picard_solve(eta, eta, cs, gaussian(1.0, 0.5), grid, options(1, 2000, 30, 1e-8));
    const auto r = weak_form_residual(sol, eta, eta, cs, monomial(2), 0, 0, steps);
    EXPECT_LT(r.stderr_cv, r.stderr_plain);
    if (prev > 0.0) {
      EXPECT_GT(r.residual_cv / prev, 0.35) << steps;
      EXPECT_LT(r.residual_cv / prev, 0.65) << steps;
    }
    prev = r.residual_cv;
  }
}

TEST(WeakForm, TestFunctionsAndArguments) {
  const auto m3 = monomial(3);
  EXPECT_DOUBLE_EQ(m3.phi(2.0), 8.0);
  EXPECT_DOUBLE_EQ(m3.dphi(2.0), 12.0);
  EXPECT_DOUBLE_EQ(m3.d2phi(2.0), 12.0);
  const auto bump = gaussian_bump(1.0, 0.5);
  const double h = 1e-4;
  EXPECT_NEAR(bump.dphi(1.3), (bump.phi(1.3 + h) - bump.phi(1.3 - h)) / (2 * h), 1e-7);
  EXPECT_NEAR(bump.d2phi(1.3), (bump.dphi(1.3 + h) - bump.dphi(1.3 - h)) / (2 * h), 1e-6);
  EXPECT_THROW(gaussian_bump(0.0, 0.0), ValidationError);

  const auto cs = coeffs({"zero", {}}, {"zero", {}}, {"zero", {}});
  const auto eta = dgm_limit(GraphSpec{}, 4);
  const auto sol = picard_solve(eta, eta, cs, InitialLaw{}, {1.0, 10}, options(2, 10));
  EXPECT_THROW(weak_form_residual(sol, eta, eta, cs, m3, 2, 0, 10), ValidationError);
  EXPECT_THROW(weak_form_residual(sol, eta, eta, cs, m3, 0, 5, 5), ValidationError);
  const auto r = weak_form_residual(sol, eta, eta, cs, m3, 0, 0, 10);
  EXPECT_EQ(r.residual_plain, 0.0);
}
