#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "slp/green.hpp"
#include "slp/presets.hpp"

namespace {

slp::FssTable constant_fss(double lambda, double half = 40.0, double h = 0.02) {
  slp::Equation eq(slp::preset("constant", lambda));
  return slp::build_fss(eq, slp::uniform_grid(-half, half, static_cast<std::size_t>(2 * half / h) + 1));
}

slp::Field constant_field(double c) {
  return slp::Field{"const", [c](double) { return c; }, {}};
}

slp::Field gaussian(double mu) {
  return slp::Field{"gauss", [mu](double t) { return std::exp(-(t - mu) * (t - mu)); }, {}};
}

}  // namespace

TEST(Green, ConstantRhsGivesConstant) {
  for (double lambda : {1.0, 2.0}) {
    const auto fss = constant_fss(lambda);
    const auto sol = slp::apply_green(fss, constant_field(1.0));
    for (std::size_t i = 0; i < sol.grid.size(); ++i)
      if (std::fabs(sol.grid[i]) <= 20.0) EXPECT_NEAR(sol.y[i] * lambda * lambda, 1.0, 1e-8) << sol.grid[i];
  }
}

TEST(Green, MatchesKernelQuadrature) {
  slp::Equation eq(slp::preset("example-4.5", 1.0));
  const auto fss = slp::build_fss(eq, slp::uniform_grid(-30, 30, 6001));
  const auto f = gaussian(1.3);
  const auto sol = slp::apply_green(fss, f);
  for (double x : {-4.0, -0.5, 1.3, 2.0, 6.0}) {
    const std::size_t i = static_cast<std::size_t>(std::lround((x + 30.0) / 0.01));
    const double xi = sol.grid[i];
    const double brute = oracle::simpson([&](double t) { return slp::green_kernel(fss, xi, t) * f(t); }, -12.0, 14.0);
    EXPECT_NEAR(sol.y[i], brute, 1e-7 * std::max(1.0, std::fabs(brute))) << x;
  }
}

TEST(Green, WeakResidual) {
  slp::Equation eq(slp::preset("example-4.5", 1.0));
  const auto fss = slp::build_fss(eq, slp::uniform_grid(-30, 30, 6001));
  const auto f = gaussian(0.0);
  auto sol = slp::apply_green(fss, f);
  const double res = slp::ode_residual(eq, sol, f, 0.5, -10.0, 10.0);
  EXPECT_LE(res, 1e-5);
  for (std::size_t i = 0; i < sol.y.size(); ++i) sol.y[i] *= 1.1;
  EXPECT_GT(slp::ode_residual(eq, sol, f, 0.5, -10.0, 10.0), 1e-2);
}

TEST(Green, TruncationSmallOnWideWindow) {
  const auto fss = constant_fss(1.0);
  const auto sol = slp::apply_green(fss, gaussian(0.0));
  EXPECT_LT(sol.truncation_error, 1e-3);
  EXPECT_GT(sol.truncation_error, 0.0);
}

TEST(Hardy, ConstantClosedForm) {
  for (double lambda : {1.0, 2.0}) {
    const auto fss = constant_fss(lambda);
    for (double p : {2.0, 1.5, 4.0}) {
      const auto rep = slp::hardy_functionals(fss, p);
      const double expect = oracle::constant_phi(lambda, p);
      EXPECT_NEAR(rep.phi2.value / expect, 1.0, 1e-6) << lambda << " " << p;
      EXPECT_NEAR(rep.phi1.value / expect, 1.0, 1e-6) << lambda << " " << p;
      EXPECT_EQ(rep.phi2.trend, slp::Trend::Bounded);
      EXPECT_LE(rep.two_form_max_rel_diff, 1e-6);
      // trimmed edge sits 8 units inside the window
      EXPECT_LT(rep.tail_rel, 2 * std::exp(-std::min(p, oracle::dual(p)) * lambda * 8.0));
    }
  }
  const auto rep = slp::hardy_functionals(constant_fss(1.0), 2.0);
  EXPECT_NEAR(rep.phi2.value, 0.25, 1e-6);
  EXPECT_NEAR(rep.upper, 1.0, 1e-5);
}

TEST(Hardy, RejectsBadExponent) {
  const auto fss = constant_fss(1.0, 5.0, 0.1);
  EXPECT_THROW(slp::hardy_functionals(fss, 1.0), slp::ContractViolation);
  EXPECT_THROW(slp::hardy_functionals(fss, INFINITY), slp::ContractViolation);
}

TEST(Hardy, TwoFormsAgreeOnPresets) {
  slp::Equation eq(slp::preset("example-4.5", 1.0));
  const auto fss = slp::build_fss(eq, slp::uniform_grid(-40, 40, 8001));
  const auto rep = slp::hardy_functionals(fss, 2.0);
  EXPECT_LE(rep.two_form_max_rel_diff, 1e-4);
  EXPECT_LE(rep.lower, rep.upper);
}

TEST(L1Norm, ConstantInverseSquare) {
  for (double lambda : {1.0, 2.0}) {
    const auto fss = constant_fss(lambda);
    const auto est = slp::l1_norm(fss, fss.lo_trim(), fss.hi_trim());
    EXPECT_NEAR(est.value * lambda * lambda, 1.0, 1e-8);
    EXPECT_EQ(est.trend, slp::Trend::Bounded);
  }
}

TEST(L1Norm, DegenerateWindow) {
  const auto fss = constant_fss(1.0, 5.0, 0.1);
  EXPECT_EQ(slp::l1_norm(fss, 1.0, 1.0).value, 0.0);
}

TEST(LpRatio, BoundedByOperatorNorm) {
  const auto fss = constant_fss(1.0);
  std::vector<slp::Field> fam{constant_field(0.0), gaussian(0.0), gaussian(5.0),
                              slp::Field{"osc", [](double t) { return std::cos(3 * t) * std::exp(-t * t / 50); }, {}}};
  const auto out = slp::lp_ratio_experiment(fss, 2.0, fam);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_TRUE(out[0].skipped);
  for (std::size_t k = 1; k < out.size(); ++k) {
    EXPECT_FALSE(out[k].skipped);
    EXPECT_GT(out[k].ratio, 0.0);
    EXPECT_LE(out[k].ratio, 1.0 + 1e-9);
  }
  // A wide bump sits near the top of the spectrum, cos(3t) near 1/10.
  EXPECT_NEAR(out[3].ratio, 0.1, 0.01);
}

TEST(Green, ZeroRhs) {
  const auto fss = constant_fss(1.0, 10.0, 0.05);
  slp::Equation eq(slp::preset("constant", 1.0));
  const auto f = constant_field(0.0);
  const auto sol = slp::apply_green(fss, f);
  for (double y : sol.y) EXPECT_EQ(y, 0.0);
  EXPECT_EQ(slp::ode_residual(eq, sol, f), 0.0);
}

TEST(Green, ResidualOnExactAndCorrupted) {
  slp::Equation eq(slp::preset("constant", 1.0));
  slp::GreenSolution sol;
  sol.grid = slp::uniform_grid(-10, 10, 2001);
  sol.y.assign(sol.grid.size(), 1.0);
  const auto f = constant_field(1.0);
  EXPECT_LE(slp::ode_residual(eq, sol, f), 1e-6);
  for (std::size_t i = 0; i < sol.grid.size(); ++i) sol.y[i] += 0.1 * std::sin(10 * sol.grid[i]);
  EXPECT_GT(slp::ode_residual(eq, sol, f), 1e-2);
}

TEST(Green, PositivityPreserved) {
  slp::Equation eq(slp::preset("example-4.5", 1.0));
  const auto fss = slp::build_fss(eq, slp::uniform_grid(-30, 30, 3001));
  for (const auto& f : {gaussian(2.0), slp::Field{"box", [](double t) { return std::fabs(t) < 3 ? 1.0 : 0.0; }, {-3, 3}}}) {
    const auto sol = slp::apply_green(fss, f);
    for (double y : sol.y) EXPECT_GE(y, 0.0);
  }
}

TEST(Hardy, ReflectionSymmetry) {
  slp::Equation eq(slp::preset("example-4.5", 1.0));
  const auto fss = slp::build_fss(eq, slp::uniform_grid(-40, 40, 8001));
  const auto rep = slp::hardy_functionals(fss, 3.0);
  EXPECT_EQ(1.0 / rep.p + 1.0 / rep.p_prime, 1.0);
  const std::size_t n = rep.grid.size();
  for (std::size_t i = fss.i_lo; i <= fss.i_hi; i += 101)
    EXPECT_NEAR(rep.phi1_values[i] / rep.phi2_values[n - 1 - i], 1.0, 1e-6) << rep.grid[i];
}

TEST(LpRatio, TranslationInvariant) {
  const auto fss = constant_fss(1.0);
  const auto out = slp::lp_ratio_experiment(fss, 2.0, {gaussian(0.0), gaussian(3.0)});
  EXPECT_NEAR(out[0].ratio, out[1].ratio, 1e-6);
}
