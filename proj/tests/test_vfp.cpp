#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dgmlab/vfp.hpp"

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

struct Scene {
  DigraphMeasure eta = dgm_limit(GraphSpec{}, 8);
  std::vector<double> u_grid = {0.5};
};

DensityField solve_single(const CoefficientSet& cs, const InitialLaw& law, const SpatialGrid& xg, const TimeGrid& tg,
                          const VfpOptions& opt = {}) {
  Scene s;
  return solve_vfp(s.eta, s.eta, cs, {initial_density(law, 0.5, xg)}, xg, s.u_grid, tg, opt);
}

double variance(const DensityField& f, std::size_t k) {
  const double m = moment(f, 0, k, 1);
  return moment(f, 0, k, 2) - m * m;
}

// L1 gap to the exact cell averages of N(mean, var).
double l1_to_gaussian(const DensityField& f, std::size_t k, double mean, double var) {
  const auto exact = initial_density(gaussian(mean, var), 0.5, f.xg);
  const double* r = f.at(0, k);
  double s = 0.0;
  for (std::size_t i = 0; i < f.xg.cells; ++i) s += std::abs(r[i] - exact[i]);
  return s * f.xg.dx();
}

}  // namespace

TEST(SpatialGridTest, Geometry) {
  const SpatialGrid g{-2.0, 2.0, 8};
  EXPECT_DOUBLE_EQ(g.dx(), 0.5);
  EXPECT_DOUBLE_EQ(g.center(0), -1.75);
  EXPECT_DOUBLE_EQ(g.face(8), 2.0);
  EXPECT_THROW((SpatialGrid{1.0, 0.0, 4}.validate()), ValidationError);
  EXPECT_THROW((SpatialGrid{0.0, 1.0, 1}.validate()), ValidationError);
}

TEST(InitialDensity, UnitMassAndMoments) {
  const SpatialGrid xg{-6.0, 6.0, 1200};
  const auto rho = initial_density(gaussian(0.5, 0.8), 0.5, xg);
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < xg.cells; ++i) {
    m0 += rho[i] * xg.dx();
    m1 += xg.center(i) * rho[i] * xg.dx();
    m2 += xg.center(i) * xg.center(i) * rho[i] * xg.dx();
  }
  EXPECT_NEAR(m0, 1.0, 1e-12);
  EXPECT_NEAR(m1, 0.5, 1e-6);
  EXPECT_NEAR(m2 - m1 * m1, 0.8 + xg.dx() * xg.dx() / 12.0, 1e-6);

  InitialLaw point;
  point.x0 = 0.35;
  const auto p = initial_density(point, 0.0, SpatialGrid{0.0, 1.0, 10});
  EXPECT_DOUBLE_EQ(p[3], 10.0);
  EXPECT_EQ(std::count(p.begin(), p.end(), 0.0), 9);
  point.x0 = 2.0;
  EXPECT_THROW(initial_density(point, 0.0, SpatialGrid{0.0, 1.0, 10}), ValidationError);
}

TEST(Vfp, ZeroDynamicsIsStationary) {
  const SpatialGrid xg{-3.0, 3.0, 60};
  const auto f = solve_single(coeffs({"zero", {}}, {"zero", {}}, {"zero", {}}), gaussian(0.0, 0.5), xg, {1.0, 10});
  for (std::size_t k = 0; k <= 10; ++k)
    for (std::size_t i = 0; i < xg.cells; ++i) EXPECT_EQ(f.at(0, k)[i], f.at(0, 0)[i]);
}

TEST(Vfp, HeatEquationVariance) {
  const SpatialGrid xg{-6.0, 6.0, 400};
  const auto f = solve_single(coeffs({"zero", {}}, {"zero", {}}, {"constant", {{"sigma", 1.0}}}), gaussian(0.0, 0.1),
                              xg, {1.0, 4});
  for (std::size_t k = 1; k <= 4; ++k) {
    const double expected = 0.1 + xg.dx() * xg.dx() / 12.0 + f.tg.time(k);
    EXPECT_NEAR(variance(f, k), expected, 0.02 * expected) << k;
    EXPECT_NEAR(mass(f, 0, k), 1.0, 1e-12);
  }
  EXPECT_LT(l1_to_gaussian(f, 4, 0.0, 1.1), 0.01);
  EXPECT_LT(boundary_mass(f, 0, 4), 1e-6);
}

TEST(Vfp, OrnsteinUhlenbeckStationaryVariance) {
  const SpatialGrid xg{-5.0, 5.0, 800};
  const auto f = solve_single(coeffs({"linear", {{"rate", -1.0}}}, {"zero", {}}, {"constant", {{"sigma", 1.0}}}),
                              gaussian(0.0, 0.5), xg, {2.0, 4});
  for (std::size_t k = 0; k <= 4; ++k) EXPECT_NEAR(variance(f, k), 0.5, 0.02 * 0.5) << k;
}

TEST(Vfp, AdvectionConvergesAtFirstOrder) {
  // a = 1, no diffusion: the exact density is the translated initial law.
  const auto cs = coeffs({"linear", {{"rate", 0.0}, {"offset", 1.0}}}, {"zero", {}}, {"zero", {}});
  std::vector<double> err;
  for (std::size_t cells : {200u, 400u, 800u}) {
    const auto f = solve_single(cs, gaussian(-1.0, 0.1), SpatialGrid{-3.0, 3.0, cells}, {1.0, 1});
    err.push_back(l1_to_gaussian(f, 1, 0.0, 0.1));
  }
  for (std::size_t j = 1; j < err.size(); ++j) {
    const double order = std::log2(err[j - 1] / err[j]);
    EXPECT_GT(order, 0.7) << j;
    EXPECT_LT(order, 1.3) << j;
  }
}

TEST(Vfp, MassConservedAndPositive) {
  Scene s;
  s.u_grid = midpoint_grid(3);
  const auto cs = coeffs({"saturating", {{"rate", 1.0}}}, {"sine", {{"k", 1.0}}},
                         {"modulated", {{"sigma", 0.5}, {"beta", 0.5}}});
  const SpatialGrid xg{-4.0, 4.0, 120};
  auto law = gaussian(-0.5, 0.3);
  law.family = InitialFamily::gaussian_u;
  law.alpha = 1.0;
  std::vector<std::vector<double>> rho0;
  for (double u : s.u_grid) rho0.push_back(initial_density(law, u, xg));
  const auto f = solve_vfp(s.eta, s.eta, cs, rho0, xg, s.u_grid, {1.0, 10});
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t k = 0; k <= 10; ++k) {
      EXPECT_NEAR(mass(f, q, k), 1.0, 1e-12);
      for (std::size_t i = 0; i < xg.cells; ++i) EXPECT_GE(f.at(q, k)[i], -1e-12);
    }
  EXPECT_GT(f.substeps, 10u);
}

TEST(Vfp, ReflectionSymmetry) {
  // Odd drift, odd interaction, symmetric initial law on a symmetric box.
  const auto cs = coeffs({"saturating", {{"rate", 1.0}}}, {"tanh", {{"k", 0.5}}}, {"constant", {{"sigma", 0.7}}});
  const SpatialGrid xg{-4.0, 4.0, 100};
  const auto f = solve_single(cs, gaussian(0.0, 1.0), xg, {1.0, 5});
  const double* r = f.at(0, 5);
  for (std::size_t i = 0; i < xg.cells; ++i) EXPECT_NEAR(r[i], r[xg.cells - 1 - i], 1e-12);
}

TEST(Vfp, TranslationEquivariance) {
  // Translation-invariant dynamics commute with shifting the box and the law.
  const auto cs = coeffs({"zero", {}}, {"linear", {{"k", 1.0}}}, {"constant", {{"sigma", 0.5}}});
  const auto a = solve_single(cs, gaussian(0.0, 0.5), SpatialGrid{-4.0, 4.0, 80}, {1.0, 4});
  const auto b = solve_single(cs, gaussian(1.5, 0.5), SpatialGrid{-2.5, 5.5, 80}, {1.0, 4});
  for (std::size_t k = 0; k <= 4; ++k)
    for (std::size_t i = 0; i < 80; ++i) EXPECT_NEAR(a.at(0, k)[i], b.at(0, k)[i], 1e-9);
}

TEST(Vfp, SubstepCapNamesTheLimitingCoefficient) {
  VfpOptions opt;
  opt.max_substeps = 10;
  try {
    solve_single(coeffs({"zero", {}}, {"zero", {}}, {"constant", {{"sigma", 1.0}}}), gaussian(0.0, 0.5),
                 SpatialGrid{-4.0, 4.0, 200}, {1.0, 1}, opt);
    FAIL() << "expected RuntimeFailure";
  } catch (const RuntimeFailure& e) {
    EXPECT_NE(std::string(e.what()).find("diffusion coefficient D"), std::string::npos) << e.what();
  }
  try {
    solve_single(coeffs({"linear", {{"rate", 0.0}, {"offset", 5.0}}}, {"zero", {}}, {"zero", {}}), gaussian(0.0, 0.5),
                 SpatialGrid{-4.0, 4.0, 200}, {1.0, 1}, opt);
    FAIL() << "expected RuntimeFailure";
  } catch (const RuntimeFailure& e) {
    EXPECT_NE(std::string(e.what()).find("drift coefficient a"), std::string::npos) << e.what();
  }
}

TEST(Vfp, InputValidation) {
  Scene s;
  const SpatialGrid xg{-1.0, 1.0, 10};
  const auto rho = initial_density(gaussian(0.0, 0.1), 0.5, xg);
  const auto cs2 = build_coefficients({"zero", {}}, {"zero", {}}, {"zero", {}}, 2, 1.0);
  EXPECT_THROW(solve_vfp(s.eta, s.eta, cs2, {rho}, xg, s.u_grid, {1.0, 1}), ValidationError);
  const auto cs = coeffs({"zero", {}}, {"zero", {}}, {"zero", {}});
  EXPECT_THROW(solve_vfp(s.eta, s.eta, cs, {rho, rho}, xg, s.u_grid, {1.0, 1}), ValidationError);
  auto half = rho;
  for (auto& v : half) v *= 0.5;
  EXPECT_THROW(solve_vfp(s.eta, s.eta, cs, {half}, xg, s.u_grid, {1.0, 1}), ValidationError);
  EXPECT_THROW(solve_vfp(s.eta, s.eta, cs, {std::vector<double>(5, 0.4)}, xg, s.u_grid, {1.0, 1}), ValidationError);
}

TEST(Vfp, AgreesWithMonteCarlo) {
  const auto cs = coeffs({"linear", {{"rate", -1.0}}}, {"linear", {{"k", 1.0}}}, {"constant", {{"sigma", 0.5}}});
  const auto eta = dgm_limit(GraphSpec{}, 8);
  PicardOptions po;
  po.u_grid = midpoint_grid(2);
  po.samples = 4000;
  po.seed = 3;
  const TimeGrid tg(1.0, 100);
  const auto law = gaussian(1.0, 0.5);
  const auto sol = picard_solve(eta, eta, cs, law, tg, po);
  ASSERT_TRUE(sol.converged);
  const SpatialGrid xg{-4.0, 5.0, 450};
  std::vector<std::vector<double>> rho0;
  for (double u : po.u_grid) rho0.push_back(initial_density(law, u, xg));
  const auto field = solve_vfp(eta, eta, cs, rho0, xg, po.u_grid, tg);
  const auto rep = compare_to_mc(field, sol, {monomial(1), monomial(2)});
  EXPECT_EQ(rep.entries.size(), 2u * 2u * 4u);
  for (const auto& e : rep.entries)
    // Sampling error plus an allowance for the Euler and grid bias.
    EXPECT_LE(e.gap, 4.0 * e.mc_stderr + 0.02) << e.test << " t=" << e.t << " q=" << e.u_index;
  MeanFieldSolution other = sol;
  other.u_grid = midpoint_grid(2);
  other.u_grid[0] = 0.3;
  EXPECT_THROW(compare_to_mc(field, other, {monomial(1)}), ValidationError);
}

TEST(Vfp, DensityCsv) {
  const SpatialGrid xg{0.0, 1.0, 4};
  const auto f = solve_single(coeffs({"zero", {}}, {"zero", {}}, {"zero", {}}), gaussian(0.5, 0.1), xg, {1.0, 2});
  std::ostringstream out;
  write_density_csv(out, f, {0, 2});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "u,t,x,rho");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2 * 4);
  std::ostringstream bad;
  EXPECT_THROW(write_density_csv(bad, f, {3}), ValidationError);
}
