#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "slp/fss.hpp"
#include "slp/presets.hpp"

namespace {

slp::FssTable constant_fss(double lambda, double half = 40.0, double h = 0.02) {
  slp::Equation eq(slp::preset("constant", lambda));
  return slp::build_fss(eq, slp::uniform_grid(-half, half, static_cast<std::size_t>(2 * half / h) + 1));
}

}  // namespace

TEST(Fss, UnitConstantClosedForms) {
  const auto f = constant_fss(1.0);
  for (std::size_t i = 0; i < f.size(); i += 97) {
    const double x = f.grid[i];
    EXPECT_NEAR(std::exp(f.log_rho[i]), 0.5, 1e-9);
    EXPECT_NEAR(f.log_v[i], x - 0.5 * std::log(2.0), 1e-8);
    EXPECT_NEAR(f.log_u[i], -x - 0.5 * std::log(2.0), 1e-8);
    EXPECT_LE(f.wronskian_residual[i], 1e-6);
  }
  ASSERT_TRUE(f.x0.has_value());
  EXPECT_NEAR(*f.x0, 0.0, 1e-9);
  EXPECT_NEAR(slp::green_kernel(f, 0.0, 0.0), 0.5, 1e-9);
}

TEST(Fss, LambdaFamilyRho) {
  for (double lambda : {2.0, 0.5}) {
    const auto f = constant_fss(lambda);
    for (std::size_t i = f.i_lo; i <= f.i_hi; i += 50) EXPECT_NEAR(std::exp(f.log_rho[i]) * 2 * lambda, 1.0, 1e-8);
    for (double x : {-3.0, 0.1, 7.7})
      for (double t : {-2.5, 0.0, 9.0})
        EXPECT_NEAR(slp::green_kernel(f, x, t) / oracle::constant_kernel(lambda, x, t), 1.0, 1e-8);
  }
}

TEST(Fss, RiccatiAttractor) {
  slp::Equation eq(slp::preset("constant", 1.0));
  slp::FssOptions opt;
  const auto grid = slp::uniform_grid(0, 20, 201);
  for (double s0 : {0.0, 0.5, 2.0}) {
    auto [s, lv] = slp::integrate_riccati(eq, grid, s0, opt);
    EXPECT_NEAR(s.back(), 1.0, 1e-12);
    EXPECT_GE(*std::min_element(s.begin(), s.end()), 0.0);
  }
}

TEST(Fss, RiccatiDecayWithoutPotential) {
  slp::Equation eq(slp::CoefficientPair::parse("1", "0"));
  slp::FssOptions opt;
  const auto grid = slp::uniform_grid(0, 10, 101);
  auto [s, lv] = slp::integrate_riccati(eq, grid, 2.0, opt);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(s[i], 2.0 / (1 + 2.0 * grid[i]), 1e-9);
}

TEST(Fss, KernelSymmetryAndDaviesHarrell) {
  slp::Equation eq(slp::preset("example-4.7"));
  const auto f = slp::build_fss(eq, slp::sinh_grid(-2000, 2000, 4001, 1.0));
  EXPECT_EQ(slp::green_kernel(f, 1, 3), slp::green_kernel(f, 3, 1));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(f.lo_trim(), f.hi_trim());
  for (int k = 0; k < 100; ++k) {
    const double x = dist(rng), t = dist(rng);
    const double g = slp::green_kernel(f, x, t);
    EXPECT_LE(std::fabs(g - slp::green_kernel_rho_form(f, x, t)), 1e-6 * g) << x << " " << t;
  }
  for (std::size_t i = f.i_lo; i <= f.i_hi; ++i) EXPECT_LE(f.wronskian_residual[i], 1e-6);
}

TEST(Fss, Example47RhoBelowInverseTail) {
  slp::Equation eq(slp::preset("example-4.7"));
  const auto f = slp::build_fss(eq, slp::sinh_grid(-2000, 2000, 4001, 1.0));
  for (std::size_t i = f.i_lo; i <= f.i_hi; ++i)
    if (f.grid[i] >= 1.0) EXPECT_LE(std::exp(f.log_rho[i]), 1.0 / f.grid[i] * (1 + 1e-9)) << f.grid[i];
}

TEST(Fss, SignsAndMonotonicity) {
  for (const char* name : {"constant", "example-4.4", "example-4.5", "example-4.7", "gaussian-q"}) {
    slp::Equation eq(slp::preset(name));
    const auto f = slp::build_fss(eq, slp::uniform_grid(-30, 30, 3001));
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_GE(f.s[i], 0.0);
      EXPECT_LE(f.sigma[i], 0.0);
      if (i) {
        EXPECT_GE(f.log_v[i], f.log_v[i - 1] - 1e-12) << name;
        EXPECT_LE(f.log_u[i], f.log_u[i - 1] + 1e-12) << name;
      }
    }
  }
}

TEST(Fss, ReductionFormulaOracle) {
  // rho(x) = v(x)^2 int_x^inf dt / (r v^2), truncated at the window edge.
  const auto f = constant_fss(1.0, 30.0);
  for (double x : {-10.0, 0.0, 5.0}) {
    const double lvx = f.log_v_at(x);
    const double tail = oracle::simpson([&](double t) { return std::exp(-2 * (f.log_v_at(t) - lvx)); }, x, f.R, 40000);
    EXPECT_NEAR(tail / f.rho_at(x), 1.0, 1e-7);
  }
}

TEST(Fss, ScaleInvarianceUnderStartSlope) {
  slp::Equation eq(slp::preset("example-4.5", 1.0));
  slp::FssOptions a, b;
  b.max_preroll_doublings = 0;  // start right at the window edge
  const auto grid = slp::uniform_grid(-40, 40, 4001);
  const auto fa = slp::build_fss(eq, grid, a);
  const auto fb = slp::build_fss(eq, grid, b);
  for (std::size_t i = fa.i_lo; i <= fa.i_hi; ++i)
    EXPECT_NEAR(fb.log_rho[i], fa.log_rho[i], 1e-6) << fa.grid[i];
}

TEST(Fss, PrincipalLimitsAtEdges) {
  const auto f = constant_fss(1.0);
  EXPECT_LT(std::exp(f.log_u.back() - f.log_v.back()), 1e-6);
  EXPECT_LT(std::exp(f.log_v.front() - f.log_u.front()), 1e-6);
}

TEST(Fss, OutOfWindowKernel) {
  const auto f = constant_fss(1.0, 5.0);
  EXPECT_THROW(slp::green_kernel(f, 0.0, 6.0), slp::ContractViolation);
}

TEST(Fss, LocalScaleBoundsHold) {
  for (const char* spec : {"constant(2)", "example-4.5(1)", "example-4.7"}) {
    slp::Equation eq(slp::preset_from_spec(spec));
    const double X = std::string(spec) == "example-4.7" ? 200.0 : 40.0;
    const auto fss = slp::build_fss(eq, slp::uniform_grid(-X, X, 8001));
    const auto prof = slp::build_profile(eq, slp::uniform_grid(fss.lo_trim(), fss.hi_trim(), 161));
    const auto rep = slp::check_otelbaev(prof, fss, eq.r_is_one());
    EXPECT_EQ(rep.skipped, 0u);
    for (const auto& c : rep.checks) {
      EXPECT_EQ(c.evaluated, c.name != "rho_d_tilde" && c.name != "rho_d" ? true : eq.r_is_one()) << spec;
      if (!c.evaluated) continue;
      EXPECT_EQ(c.passed, c.points) << spec << " " << c.name << " worst " << c.worst_margin << " at " << c.worst_x;
    }
  }
}
