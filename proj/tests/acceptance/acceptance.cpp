// Acceptance checks, one line per criterion. Exit status is the number of
// failed criteria. Tolerances and windows are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "slp/aux.hpp"
#include "slp/criteria.hpp"
#include "slp/fss.hpp"
#include "slp/green.hpp"
#include "slp/presets.hpp"

namespace {

constexpr double kClosedFormRel = 1e-6;
constexpr double kClosedFormSeconds = 10.0;
constexpr double kSuiteFraction = 0.99;
constexpr double kSuiteWorst = -1e-6;
constexpr double kSuiteSeconds = 60.0;
constexpr double kDecayCeiling = 1e-3;
constexpr double kThetaTol = 1e-4;
constexpr double kResidualTol = 1e-5;
constexpr double kSandwichSlack = 1e-6;
constexpr double kNecessitySeconds = 5.0;
constexpr double kCoveringTol = 1e-5;
constexpr double kTwoFormTol = 1e-6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Check {
  bool ok = true;
  std::ostringstream detail;
  std::string first_failure;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) first_failure = what;
    ok = ok && cond;
  }
  void rel(double got, double want, double tol, const std::string& what) {
    const double e = std::fabs(got / want - 1.0);
    require(std::isfinite(got) && e <= tol, what + " = " + slp::detail::format_number(got) + " vs " +
                                              slp::detail::format_number(want));
  }
};

slp::CriteriaConfig window(double X, std::size_t doublings, std::size_t grid) {
  slp::CriteriaConfig c;
  c.a = -X;
  c.b = X;
  c.doublings = doublings;
  c.grid_points = grid;
  return c;
}

int failures = 0;

void report(int id, const char* title, const Check& c) {
  std::printf("criterion %d %s: %s", id, c.ok ? "PASS" : "FAIL", title);
  const std::string d = c.detail.str();
  if (!d.empty()) std::printf(" | %s", d.c_str());
  if (!c.ok) std::printf(" | first failure: %s", c.first_failure.c_str());
  std::printf("\n");
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

void guarded(int id, const char* title, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  report(id, title, c);
}

// 1. r = 1, q = lambda^2.
void closed_forms(Check& c) {
  for (double lambda : {1.0, 2.0, 0.5}) {
    const auto t0 = Clock::now();
    const std::string tag = "lambda=" + slp::detail::format_number(lambda) + " ";
    slp::Equation eq(slp::preset("constant", lambda));

    const auto cfg = window(20.0 / lambda, 3, 257);
    const auto prof = slp::build_profile(eq, slp::nested_grid(cfg));
    for (std::size_t i = 0; i < prof.grid.size(); i += 7) {
      c.rel(prof.d1[i], 1 / lambda, kClosedFormRel, tag + "d1");
      c.rel(prof.d2[i], 1 / lambda, kClosedFormRel, tag + "d2");
      c.rel(prof.phi[i], 1 / lambda, kClosedFormRel, tag + "phi");
      c.rel(prof.psi[i], 1 / lambda, kClosedFormRel, tag + "psi");
      c.rel(prof.h[i], 1 / (2 * lambda), kClosedFormRel, tag + "h");
      c.rel(prof.d[i], 1 / (4 * lambda), kClosedFormRel, tag + "d");
    }
    const auto B = slp::compute_B(prof, cfg.half_widths(), 0.0);
    c.rel(B.value, 1 / (8 * lambda * lambda), kClosedFormRel, tag + "B");

    const double X = 40.0 / lambda;
    const auto fss = slp::build_fss(eq, slp::uniform_grid(-X, X, 4001));
    for (std::size_t i = fss.i_lo; i <= fss.i_hi; i += 37)
      c.rel(std::exp(fss.log_rho[i]), 1 / (2 * lambda), kClosedFormRel, tag + "rho");
    for (double x : {-3.0, 0.0, 1.7})
      for (double t : {-2.5, 0.4, 3.3}) {
        const double xs = x / lambda, ts = t / lambda;
        c.rel(slp::green_kernel(fss, xs, ts), oracle::constant_kernel(lambda, xs, ts), kClosedFormRel, tag + "G");
      }
    const auto l1 = slp::l1_norm(fss, fss.lo_trim(), fss.hi_trim());
    c.rel(l1.value, 1 / (lambda * lambda), kClosedFormRel, tag + "L1 norm");
    for (double p : {2.0, 1.5, 4.0}) {
      const auto h = slp::hardy_functionals(fss, p);
      c.rel(h.phi2.value, oracle::constant_phi(lambda, p), kClosedFormRel, tag + "Phi2(p=" + slp::detail::format_number(p) + ")");
    }
    const double s = seconds_since(t0);
    c.require(s < kClosedFormSeconds, tag + "runtime " + slp::detail::format_number(s));
    c.detail << tag << std::fixed;
    c.detail.precision(2);
    c.detail << s << "s ";
  }
}

// 2. Two-sided bounds between the fundamental system and the local scales.
void inequality_suites(Check& c) {
  struct Case {
    const char* preset;
    double X;
    std::size_t fss_points, profile_points;
  };
  for (const Case& k : {Case{"constant", 40, 4001, 401}, Case{"example-4.5(1)", 100, 20001, 801},
                        Case{"example-4.7", 1000, 20001, 801}}) {
    const auto t0 = Clock::now();
    slp::Equation eq(slp::preset_from_spec(k.preset));
    const auto fss = slp::build_fss(eq, slp::uniform_grid(-k.X, k.X, k.fss_points));
    const auto prof = slp::build_profile(eq, slp::uniform_grid(fss.lo_trim(), fss.hi_trim(), k.profile_points));
    const auto rep = slp::check_otelbaev(prof, fss, eq.r_is_one());
    double worst_fraction = 1.0;
    for (const auto& ch : rep.checks) {
      if (!ch.evaluated) continue;
      const std::string tag = std::string(k.preset) + " " + ch.name;
      c.require(ch.points > 0, tag + " has no points");
      c.require(ch.fraction >= kSuiteFraction, tag + " fraction " + slp::detail::format_number(ch.fraction));
      c.require(ch.worst_margin >= kSuiteWorst, tag + " worst " + slp::detail::format_number(ch.worst_margin));
      worst_fraction = std::min(worst_fraction, ch.fraction);
    }
    const double s = seconds_since(t0);
    c.require(s < kSuiteSeconds, std::string(k.preset) + " runtime");
    c.detail << k.preset << " min pass " << worst_fraction << " ";
  }
}

// 3. cos|x|^alpha: solvable for alpha >= 1, not for alpha = 1/2.
void dichotomy(Check& c) {
  for (auto [alpha, X] : {std::pair{1.0, 1000.0}, std::pair{2.0, 300.0}}) {
    const auto v = slp::decide(slp::preset("example-4.5", alpha), window(X, 4, 2049));
    const std::string tag = "alpha=" + slp::detail::format_number(alpha) + " ";
    c.require(v.m && v.m->first_pass.has_value(), tag + "no positive m(a)");
    c.require(v.outcome == slp::Outcome::SolvableAllP, tag + "verdict " + slp::to_string(v.outcome));
    if (v.m && v.m->first_pass)
      c.detail << tag << "m(" << v.m->scales[*v.m->first_pass] << ") = " << v.m->estimates[*v.m->first_pass].value << " ";
  }
  const auto v = slp::decide(slp::preset("example-4.5", 0.5), window(10000, 9, 2049));
  c.require(v.m.has_value() && v.m->scales.size() == 3, "alpha=0.5 m scan incomplete");
  if (v.m)
    for (std::size_t k = 0; k < v.m->scales.size(); ++k) {
      const double m = v.m->estimates[k].value;
      c.require(m < kDecayCeiling, "alpha=0.5 m(" + slp::detail::format_number(v.m->scales[k]) + ") = " +
                                       slp::detail::format_number(m));
      c.detail << "alpha=0.5 m(" << v.m->scales[k] << ") = " << m << " ";
    }
  const auto* B = v.find("B");
  c.require(B && B->estimate && B->estimate->trend == slp::Trend::Growing, "alpha=0.5 B not growing");
  c.require(v.outcome == slp::Outcome::NotSolvable, std::string("alpha=0.5 verdict ") + slp::to_string(v.outcome));
}

// 4. r = x^2 outside [-1, 1], q = |x|^(-1/2) outside.
void example_47(Check& c) {
  slp::Equation eq(slp::preset("example-4.7"));
  for (int k = 0; k < 20; ++k) {
    const double x = 10.0 * std::pow(100.0, k / 19.0);
    const double d2 = slp::solve_d2(eq, x, 1e-10);
    c.require(d2 >= x * x / 4 && d2 <= 4 * x * x, "d2(" + slp::detail::format_number(x) + ") = " +
                                                      slp::detail::format_number(d2));
  }
  double lo = INFINITY, hi = 0.0;
  for (int k = 0; k < 31; ++k) {
    const double ax = 10.0 * std::pow(1000.0, k / 30.0);
    for (double x : {-ax, ax}) {
      const double hx = slp::phi_psi_h(eq, x, 1e-10).h * std::fabs(x);
      lo = std::min(lo, hx);
      hi = std::max(hi, hx);
      c.require(hx >= 1.0 / 16 && hx <= 16.0, "h|x| at " + slp::detail::format_number(x));
    }
  }
  c.detail << "h|x| in [" << lo << ", " << hi << "] ";
  const auto v = slp::decide(slp::preset("example-4.7"), window(10000, 5, 2049));
  const auto* B = v.find("B");
  c.require(B && B->estimate && B->estimate->trend == slp::Trend::Bounded, "B trend");
  if (B) c.detail << "B = " << B->value << " (" << (B->estimate ? slp::to_string(B->estimate->trend) : "none") << ") ";
}

// 5. theta = 4 - 1/X on [-X, X] for r = x^2 outside [-1, 1].
void theta_route(Check& c) {
  slp::Equation eq(slp::preset("example-4.4", 0.5));
  for (double X : {10.0, 100.0, 1000.0}) {
    const auto cfg = window(X, 4, 2049);
    const auto t = slp::compute_theta(eq, slp::nested_grid(cfg, eq.breakpoints()), cfg.half_widths(), 0.0, cfg);
    const std::string tag = "X=" + slp::detail::format_number(X) + " ";
    c.require(std::fabs(t.estimate.value - (4 - 1 / X)) <= kThetaTol, tag + "theta = " +
                                                                        slp::detail::format_number(t.estimate.value));
    c.require(t.estimate.trend == slp::Trend::Bounded, tag + "trend");
  }
  for (double alpha : {0.5, 1.0, 3.0}) {
    const auto v = slp::decide(slp::preset("example-4.4", alpha), window(100, 4, 2049));
    c.require(v.outcome == slp::Outcome::SolvableAllP,
              "alpha=" + slp::detail::format_number(alpha) + " verdict " + slp::to_string(v.outcome));
    c.detail << "alpha=" << alpha << " " << slp::to_string(v.outcome) << " (" << v.reason << ") ";
  }
}

// 6. Green operator applied to a Gaussian.
void green_solve(Check& c) {
  slp::Equation eq(slp::preset("constant", 1.0));
  const auto fss = slp::build_fss(eq, slp::uniform_grid(-40, 40, 4001));
  const slp::Field f{"gauss", [](double t) { return std::exp(-t * t); }, {}};
  const auto sol = slp::apply_green(fss, f);
  const double res = slp::ode_residual(eq, sol, f);
  const auto ratio = slp::lp_ratio_experiment(fss, 2.0, {f}).front();
  const auto hardy = slp::hardy_functionals(fss, 2.0);
  c.require(res <= kResidualTol, "residual " + slp::detail::format_number(res));
  c.require(ratio.ratio <= hardy.upper + kSandwichSlack, "ratio above the upper bound");
  c.detail << "residual " << res << ", ratio " << ratio.ratio << " <= " << hardy.upper;
}

// 7. q vanishing on a half-line.
void necessity(Check& c) {
  const auto t0 = Clock::now();
  const auto v = slp::decide(slp::preset("half-line-zero"), slp::CriteriaConfig{});
  const double s = seconds_since(t0);
  const auto* c15 = v.find("necessary_q_tails");
  c.require(v.outcome == slp::Outcome::NotSolvable, std::string("verdict ") + slp::to_string(v.outcome));
  c.require(c15 && c15->status == slp::CertStatus::Fail, "q tail condition did not fail");
  c.require(s < kNecessitySeconds, "runtime " + slp::detail::format_number(s));
  c.detail << slp::to_string(v.outcome) << " in " << s << "s";
}

// 8. Cumulative 1/(r h) across the covering.
void covering(Check& c) {
  slp::Equation eq(slp::preset("constant", 1.0));
  const slp::HField hf(eq, -12, 12);
  const auto cov = slp::build_covering(hf, 0.0, -6, 6, 1e-9);
  int seen = 0;
  double worst = 0.0;
  for (const auto& s : cov.segments) {
    if (s.n < 1 || s.n > 10) continue;
    ++seen;
    worst = std::max(worst, std::fabs(s.rh_from_base - (s.n - 1)));
  }
  c.require(seen == 10, "only " + std::to_string(seen) + " right segments");
  c.require(worst <= kCoveringTol, "defect " + slp::detail::format_number(worst));
  c.detail << "max |cumulative - (n - 1)| = " << worst;
}

// 9. Phi from log u, log v against Phi from rho and the phase.
void two_forms(Check& c) {
  struct Case {
    const char* preset;
    double X;
    std::size_t n;
    bool sinh;
  };
  const Case cases[] = {{"constant(1)", 40, 4001, false},     {"constant(2)", 20, 4001, false},
                        {"constant(0.5)", 80, 4001, false},   {"example-4.4(0.5)", 200, 8001, false},
                        {"example-4.4(1)", 200, 8001, false}, {"example-4.4(3)", 20, 8001, false},
                        {"example-4.5(1)", 100, 10001, false}, {"example-4.5(2)", 100, 20001, false},
                        {"example-4.5(0.5)", 400, 20001, false}, {"example-4.7", 2000, 4001, true},
                        {"gaussian-q", 6, 2001, false},        {"half-line-zero", 20, 2001, false}};
  double worst = 0.0;
  std::string where;
  for (const auto& k : cases) {
    slp::Equation eq(slp::preset_from_spec(k.preset));
    const auto grid = k.sinh ? slp::sinh_grid(-k.X, k.X, k.n) : slp::uniform_grid(-k.X, k.X, k.n);
    const auto fss = slp::build_fss(eq, grid);
    for (double p : {2.0, 1.5, 4.0}) {
      const double d = slp::hardy_functionals(fss, p).two_form_max_rel_diff;
      c.require(d <= kTwoFormTol, std::string(k.preset) + " p=" + slp::detail::format_number(p) + " diff " +
                                      slp::detail::format_number(d));
      if (d > worst) {
        worst = d;
        where = k.preset;
      }
    }
  }
  c.detail << "worst " << worst << " on " << where;
}

}  // namespace

int main() {
  guarded(1, "closed forms for r = 1, q = lambda^2", closed_forms);
  guarded(2, "two-sided local-scale bounds", inequality_suites);
  guarded(3, "cos|x|^alpha dichotomy", dichotomy);
  guarded(4, "x^2 / |x|^(-1/2) asymptotics", example_47);
  guarded(5, "theta route", theta_route);
  guarded(6, "Green solve residual and norm sandwich", green_solve);
  guarded(7, "half-line zero potential is rejected", necessity);
  guarded(8, "covering cumulative integrals", covering);
  guarded(9, "two forms of the Hardy functionals", two_forms);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
