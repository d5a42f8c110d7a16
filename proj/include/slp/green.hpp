#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "slp/coefficients.hpp"
#include "slp/estimate.hpp"
#include "slp/fss.hpp"
#include "slp/quad.hpp"

namespace slp {

namespace detail {

inline constexpr double kG4x[4] = {-0.861136311594052575224, -0.339981043584856264803, 0.339981043584856264803,
                                   0.861136311594052575224};
inline constexpr double kG4w[4] = {0.347854845137453857373, 0.652145154862546142627, 0.652145154862546142627,
                                   0.347854845137453857373};
inline constexpr double kG3x[3] = {-0.774596669241483377036, 0.0, 0.774596669241483377036};
inline constexpr double kG3w[3] = {0.555555555555555555556, 0.888888888888888888889, 0.555555555555555555556};

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

/// log of int_a^b exp(e(t)) dt for e with values ea, eb and slopes ga, gb at
/// the ends: trapezoid with endpoint derivative correction, falling back to
/// the exponential-fit rule when the correction would dominate.
inline double log_cell_integral(double h, double ea, double eb, double ga, double gb) {
  const double m = std::max(ea, eb);
  const double fa = std::exp(ea - m), fb = std::exp(eb - m);
  const double corrected = 0.5 * h * (fa + fb) + h * h / 12.0 * (ga * fa - gb * fb);
  if (corrected > 0.25 * h * (fa + fb)) return m + std::log(corrected);
  const double de = eb - ea;
  if (std::fabs(de) < 1e-12) return m + std::log(h * 0.5 * (fa + fb));
  return m + std::log(h * (fb - fa) / de);
}

/// Cumulative log-integrals of exp(e) from the left end (forward) and from
/// each node to the right end (backward).
inline void log_cumulative(const std::vector<double>& x, const std::vector<double>& e, const std::vector<double>& g_r,
                           const std::vector<double>& g_l, std::vector<double>& fwd, std::vector<double>& bwd) {
  const std::size_t n = x.size();
  const double ninf = -std::numeric_limits<double>::infinity();
  fwd.assign(n, ninf);
  bwd.assign(n, ninf);
  std::vector<double> cell(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) cell[i] = log_cell_integral(x[i + 1] - x[i], e[i], e[i + 1], g_r[i], g_l[i + 1]);
  for (std::size_t i = 1; i < n; ++i) fwd[i] = log_add(fwd[i - 1], cell[i - 1]);
  for (std::size_t i = n - 1; i-- > 0;) bwd[i] = log_add(bwd[i + 1], cell[i]);
}

}  // namespace detail

/// Solution of the equation with a given right-hand side, sampled on the FSS grid.
struct GreenSolution {
  std::vector<double> grid, y;
  std::string f_id;
  double ode_residual_norm = std::numeric_limits<double>::quiet_NaN();
  double truncation_error = 0.0;  // bound on the mass of the kernel beyond the window, relative to sup|f|
  std::map<double, double> lp_ratio;
};

/// y(x) = u(x) int_L^x v f + v(x) int_x^R u f, evaluated as
/// rho(x) (A(x) + B(x)) with A, B accumulated in ratio form so that nothing
/// overflows.
inline GreenSolution apply_green(const FssTable& fss, const Field& f) {
  const auto& x = fss.grid;
  const std::size_t n = x.size();
  GreenSolution sol;
  sol.grid = x;
  sol.f_id = f.id;
  sol.y.assign(n, 0.0);
  std::vector<double> A(n, 0.0), B(n, 0.0), fvals(n);
  double fmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fvals[i] = f(x[i]);
    detail::check_finite(fvals[i], x[i], f.id);
    fmax = std::max(fmax, std::fabs(fvals[i]));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<double> cuts{x[i]};
    for (auto it = std::upper_bound(f.breakpoints.begin(), f.breakpoints.end(), x[i]);
         it != f.breakpoints.end() && *it < x[i + 1]; ++it)
      cuts.push_back(*it);
    cuts.push_back(x[i + 1]);
    double sv = 0.0, su = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double c = 0.5 * (cuts[k] + cuts[k + 1]), hw = 0.5 * (cuts[k + 1] - cuts[k]);
      for (int j = 0; j < 4; ++j) {
        const double t = c + hw * detail::kG4x[j];
        const double ft = f(t);
        fmax = std::max(fmax, std::fabs(ft));
        const double lv = fss.hermite(i, t, fss.log_v[i], fss.log_v[i + 1], fss.dlv(i, true), fss.dlv(i, false));
        const double lu = fss.hermite(i, t, fss.log_u[i], fss.log_u[i + 1], fss.dlu(i, true), fss.dlu(i, false));
        sv += hw * detail::kG4w[j] * std::exp(lv - fss.log_v[i + 1]) * ft;
        su += hw * detail::kG4w[j] * std::exp(lu - fss.log_u[i]) * ft;
      }
    }
    // A(i+1) = A(i) v(i)/v(i+1) + int_cell v/v(i+1) f.
    A[i + 1] = A[i] * std::exp(fss.log_v[i] - fss.log_v[i + 1]) + sv;
    B[i] = su;  // cell part; completed below
  }
  for (std::size_t i = n - 1; i-- > 0;) B[i] += B[i + 1] * std::exp(fss.log_u[i + 1] - fss.log_u[i]);
  for (std::size_t i = 0; i < n; ++i) sol.y[i] = std::exp(fss.log_rho[i]) * (A[i] + B[i]);

  // Envelope of the kernel mass beyond the window: v decays to the left at
  // rate s/r from L, u decays to the right at rate |sigma|/r from R.
  double worst = 0.0;
  const double left_rate = fss.s.front() / fss.r_r.front();
  const double right_rate = -fss.sigma.back() / fss.r_l.back();
  for (std::size_t i = fss.i_lo; i <= fss.i_hi; ++i) {
    const double lt = left_rate > 0 ? std::exp(fss.log_u[i] + fss.log_v.front()) / left_rate
                                    : std::numeric_limits<double>::infinity();
    const double rt = right_rate > 0 ? std::exp(fss.log_v[i] + fss.log_u.back()) / right_rate
                                     : std::numeric_limits<double>::infinity();
    worst = std::max(worst, lt + rt);
  }
  sol.truncation_error = worst * fmax;
  return sol;
}

namespace detail {

/// First derivative at node i from a 5-point stencil (Fornberg weights on
/// the actual, possibly non-uniform, nodes).
inline double fd_derivative(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  const std::size_t n = x.size();
  const std::size_t m = std::min<std::size_t>(5, n);
  std::size_t start = i >= 2 ? i - 2 : 0;
  if (start + m > n) start = n - m;
  const double z = x[i];
  // Fornberg's algorithm for weights of the first derivative.
  double c[5][2] = {};
  double c1 = 1.0, c4 = x[start] - z;
  c[0][0] = 1.0;
  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t mn = std::min<std::size_t>(k, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[start + k] - z;
    for (std::size_t j = 0; j < k; ++j) {
      const double c3 = x[start + k] - x[start + j];
      c2 *= c3;
      if (j == k - 1) {
        for (std::size_t s = mn; s >= 1; --s) c[k][s] = c1 * (static_cast<double>(s) * c[k - 1][s - 1] - c5 * c[k - 1][s]) / c2;
        c[k][0] = -c1 * c5 * c[k - 1][0] / c2;
      }
      for (std::size_t s = mn; s >= 1; --s) c[j][s] = (c4 * c[j][s] - static_cast<double>(s) * c[j][s - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  double d = 0.0;
  for (std::size_t k = 0; k < m; ++k) d += c[k][1] * y[start + k];
  return d;
}

}  // namespace detail

/// Weak-form residual max |int r y' w' + int q y w - int f w| / (1 + |int f w|)
/// over hat functions w of half-width `test_width` centred at nodes inside
/// [lo, hi]. y' comes from 5-point differences and y is cubic Hermite within
/// cells.
inline double ode_residual(const Equation& eq, const GreenSolution& sol, const Field& f, double test_width, double lo,
                           double hi) {
  const auto& x = sol.grid;
  const auto& y = sol.y;
  const std::size_t n = x.size();
  if (n < 5) return 0.0;
  std::vector<double> dy(n);
  for (std::size_t i = 0; i < n; ++i) dy[i] = detail::fd_derivative(x, y, i);
  double worst = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double xc = x[c];
    const double a = xc - test_width, b = xc + test_width;
    if (xc < lo || xc > hi || a < x.front() || b > x.back()) continue;
    // Cells of the support, split at a, xc, b.
    std::vector<double> cuts{a, xc, b};
    for (auto it = std::upper_bound(x.begin(), x.end(), a); it != x.end() && *it < b; ++it) cuts.push_back(*it);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double stiff = 0.0, mass = 0.0, load = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double p = cuts[k], qq = cuts[k + 1];
      const double mid = 0.5 * (p + qq), hw = 0.5 * (qq - p);
      auto it = std::upper_bound(x.begin(), x.end(), mid);
      const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
      const double h = x[i + 1] - x[i];
      for (int j = 0; j < 3; ++j) {
        const double t = mid + hw * detail::kG3x[j];
        const double wgt = detail::kG3w[j] * hw;
        const double s = (t - x[i]) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double yv = (2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * h * dy[i] + (-2 * s3 + 3 * s2) * y[i + 1] +
                          (s3 - s2) * h * dy[i + 1];
        const double yd = ((6 * s2 - 6 * s) * y[i] + (3 * s2 - 4 * s + 1) * h * dy[i] + (-6 * s2 + 6 * s) * y[i + 1] +
                           (3 * s2 - 2 * s) * h * dy[i + 1]) / h;
        const double w = 1.0 - std::fabs(t - xc) / test_width;
        const double wd = (t < xc ? 1.0 : -1.0) / test_width;
        stiff += wgt * eq.r(t) * yd * wd;
        mass += wgt * eq.q(t) * yv * w;
        load += wgt * f(t) * w;
      }
    }
    worst = std::max(worst, std::fabs(stiff + mass - load) / (1.0 + std::fabs(load)));
  }
  return worst;
}

/// Same with hat functions four grid steps wide on the central 80% of the grid.
inline double ode_residual(const Equation& eq, const GreenSolution& sol, const Field& f) {
  const auto& x = sol.grid;
  if (x.size() < 5) return 0.0;
  const double span = x.back() - x.front();
  const double lo = x.front() + 0.1 * span, hi = x.back() - 0.1 * span;
  double step = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (x[i] >= lo && x[i + 1] <= hi) step = std::max(step, x[i + 1] - x[i]);
  return ode_residual(eq, sol, f, 4.0 * step, lo, hi);
}

/// ||y||_p and ||f||_p over [lo, hi], with y cubic Hermite in each cell.
inline double lp_norm_of_samples(const std::vector<double>& x, const std::vector<double>& y, double p, double lo,
                                 double hi) {
  const std::size_t n = x.size();
  std::vector<double> dy(n);
  for (std::size_t i = 0; i < n; ++i) dy[i] = detail::fd_derivative(x, y, i);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = std::max(lo, x[i]), b = std::min(hi, x[i + 1]);
    if (!(b > a)) continue;
    const double h = x[i + 1] - x[i];
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (int j = 0; j < 4; ++j) {
      const double t = mid + hw * detail::kG4x[j];
      const double s = (t - x[i]) / h, s2 = s * s, s3 = s2 * s;
      const double yv = (2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * h * dy[i] + (-2 * s3 + 3 * s2) * y[i + 1] +
                        (s3 - s2) * h * dy[i + 1];
      sum += detail::kG4w[j] * hw * std::pow(std::fabs(yv), p);
    }
  }
  return std::pow(sum, 1.0 / p);
}

inline double lp_norm_of_field(const Field& f, double p, double lo, double hi, double tol = 1e-12) {
  Field g{f.id, [&f, p](double t) { return std::pow(std::fabs(f(t)), p); }, f.breakpoints};
  return std::pow(integrate(g, lo, hi, tol), 1.0 / p);
}

struct HardyReport {
  double p = 2.0, p_prime = 2.0;
  BoundEstimate phi1, phi2;
  double lower = 0.0, upper = 0.0;
  double two_form_max_rel_diff = 0.0;  // u,v form against rho,phase form
  double tail_rel = 0.0;               // envelope of the truncated tails relative to the integrals
  std::vector<double> grid, phi1_values, phi2_values, phi1_rho_form, phi2_rho_form;
};

/// Phi_2(x) = (int_{-inf}^x v^p)^{1/p} (int_x^inf u^{p'})^{1/p'} and Phi_1
/// with p and p' exchanged, computed on the window in two ways: from
/// log v and log u, and from rho and the phase. Sups are taken over nested
/// windows inside the trimmed range, centred at the middle of the window.
inline HardyReport hardy_functionals(const FssTable& fss, double p, std::size_t nested = 4) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ContractViolation("hardy_functionals: need 1 < p < inf");
  HardyReport rep;
  rep.p = p;
  rep.p_prime = p / (p - 1.0);
  const double pp = rep.p_prime;
  const auto& x = fss.grid;
  const std::size_t n = x.size();

  std::vector<double> gv_r(n), gv_l(n), gu_r(n), gu_l(n);
  for (std::size_t i = 0; i < n; ++i) {
    gv_r[i] = fss.s[i] / fss.r_r[i];
    gv_l[i] = fss.s[i] / fss.r_l[i];
    gu_r[i] = fss.sigma[i] / fss.r_r[i];
    gu_l[i] = fss.sigma[i] / fss.r_l[i];
  }
  auto scaled = [](const std::vector<double>& v, double k) {
    std::vector<double> o(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) o[i] = k * v[i];
    return o;
  };
  // Exponents of v and u in the two forms.
  std::vector<double> lv_a = fss.log_v, lu_a = fss.log_u, lv_b(n), lu_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    lv_b[i] = 0.5 * (fss.log_rho[i] + fss.phase[i]);
    lu_b[i] = 0.5 * (fss.log_rho[i] - fss.phase[i]);
  }

  auto phi = [&](const std::vector<double>& lv, const std::vector<double>& lu, double a, double b) {
    // (int_L^x v^a)^{1/a} (int_x^R u^b)^{1/b}
    std::vector<double> fv, bv, fu, bu;
    detail::log_cumulative(x, scaled(lv, a), scaled(gv_r, a), scaled(gv_l, a), fv, bv);
    detail::log_cumulative(x, scaled(lu, b), scaled(gu_r, b), scaled(gu_l, b), fu, bu);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(fv[i] / a + bu[i] / b);
    return out;
  };
  rep.grid = x;
  rep.phi2_values = phi(lv_a, lu_a, p, pp);
  rep.phi1_values = phi(lv_a, lu_a, pp, p);
  rep.phi2_rho_form = phi(lv_b, lu_b, p, pp);
  rep.phi1_rho_form = phi(lv_b, lu_b, pp, p);

  double diff = 0.0;
  for (std::size_t i = fss.i_lo; i <= fss.i_hi; ++i) {
    diff = std::max(diff, std::fabs(rep.phi2_rho_form[i] / rep.phi2_values[i] - 1.0));
    diff = std::max(diff, std::fabs(rep.phi1_rho_form[i] / rep.phi1_values[i] - 1.0));
  }
  rep.two_form_max_rel_diff = diff;

  // Tail envelopes: int_{-inf}^L v^a ~ v(L)^a r(L) / (a s(L)), likewise on the right.
  double tail = 0.0;
  {
    std::vector<double> fv, bv, fu, bu;
    for (double a : {p, pp}) {
      detail::log_cumulative(x, scaled(lv_a, a), scaled(gv_r, a), scaled(gv_l, a), fv, bv);
      detail::log_cumulative(x, scaled(lu_a, a), scaled(gu_r, a), scaled(gu_l, a), fu, bu);
      const double lrate = a * gv_r.front(), rrate = -a * gu_l.back();
      const double ltail = lrate > 0 ? a * lv_a.front() - std::log(lrate) : std::numeric_limits<double>::infinity();
      const double rtail = rrate > 0 ? a * lu_a.back() - std::log(rrate) : std::numeric_limits<double>::infinity();
      for (std::size_t i = fss.i_lo; i <= fss.i_hi; ++i) {
        tail = std::max(tail, std::exp(ltail - fv[i]));
        tail = std::max(tail, std::exp(rtail - bu[i]));
      }
    }
  }
  rep.tail_rel = tail;

  std::vector<double> xs(x.begin() + static_cast<long>(fss.i_lo), x.begin() + static_cast<long>(fss.i_hi) + 1);
  auto sub = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<long>(fss.i_lo), v.begin() + static_cast<long>(fss.i_hi) + 1);
  };
  const double center = 0.5 * (xs.front() + xs.back());
  const double half = 0.5 * (xs.back() - xs.front());
  std::vector<double> widths;
  for (std::size_t k = nested; k-- > 0;) widths.push_back(half / std::pow(2.0, static_cast<double>(k)));
  rep.phi1 = nested_extremum(xs, sub(rep.phi1_values), widths, center, false);
  rep.phi2 = nested_extremum(xs, sub(rep.phi2_values), widths, center, false);
  rep.lower = std::max(rep.phi1.value, rep.phi2.value);
  rep.upper = std::pow(p, 1.0 / p) * std::pow(pp, 1.0 / pp) * (rep.phi1.value + rep.phi2.value);
  return rep;
}

/// Sup over t of int G(x, t) dx with x restricted to [a, b], i.e. the sup
/// of G applied to the indicator of [a, b]; nested windows centred at the
/// middle of [a, b].
inline BoundEstimate l1_norm(const FssTable& fss, double a, double b, std::size_t nested = 4) {
  BoundEstimate est;
  est.a = a;
  est.b = b;
  if (!(b > a)) {
    est.value = 0.0;
    est.arg_x = a;
    est.evidence.emplace_back(0.0, 0.0);
    est.trend = Trend::Bounded;
    est.grade = "certified-on-window";
    return est;
  }
  const double center = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t k = nested; k-- > 0;) {
    const double w = half / std::pow(2.0, static_cast<double>(k));
    const double lo = center - w, hi = center + w;
    Field ind{"indicator", [lo, hi](double t) { return t >= lo && t <= hi ? 1.0 : 0.0; }, {lo, hi}};
    const auto sol = apply_green(fss, ind);
    double best = 0.0, arg = center;
    for (std::size_t i = 0; i < sol.grid.size(); ++i)
      if (sol.y[i] > best) {
        best = sol.y[i];
        arg = sol.grid[i];
      }
    est.evidence.emplace_back(w, best);
    est.value = best;
    est.arg_x = arg;
  }
  est.trend = classify_sup_trend(est.evidence);
  est.grade = "certified-on-window";
  return est;
}

struct RatioEntry {
  std::string f_id;
  bool skipped = false;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double y_norm = 0.0, f_norm = 0.0;
};

/// ||G f||_p / ||f||_p on the trimmed window for each f.
inline std::vector<RatioEntry> lp_ratio_experiment(const FssTable& fss, double p, const std::vector<Field>& family) {
  std::vector<RatioEntry> out;
  const double lo = fss.lo_trim(), hi = fss.hi_trim();
  for (const auto& f : family) {
    RatioEntry e;
    e.f_id = f.id;
    e.f_norm = lp_norm_of_field(f, p, lo, hi);
    if (!(e.f_norm > 0.0)) {
      e.skipped = true;
      out.push_back(e);
      continue;
    }
    const auto sol = apply_green(fss, f);
    e.y_norm = lp_norm_of_samples(sol.grid, sol.y, p, lo, hi);
    e.ratio = e.y_norm / e.f_norm;
    out.push_back(e);
  }
  return out;
}

}  // namespace slp
