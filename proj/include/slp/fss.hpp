#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "slp/aux.hpp"
#include "slp/coefficients.hpp"
#include "slp/error.hpp"
#include "slp/grid.hpp"

namespace slp {

struct FssOptions {
  double rtol = 1e-11;
  double atol = 1e-14;
  double trim = 0.1;               // fraction of the window dropped at each end for checks
  int max_preroll_doublings = 40;
  double preroll_tol = 1e-10;
  std::size_t preroll_max_evals = 4000000;  // per side; the last finished start is kept when exceeded
};

/// Log-scaled fundamental system on a window. v grows to the right, u to
/// the left, r (v'u - u'v) = 1, rho = u v.
struct FssTable {
  double L = 0.0, R = 0.0;
  std::vector<double> grid;
  std::vector<double> log_v, s, sigma, log_rho, log_u;
  std::vector<double> log_u_shoot;  // backward-integrated log u, same normalisation as log_u
  std::vector<double> phase;        // int_{x_ref}^x dt / (r rho), by quadrature of (s - sigma)/r
  std::vector<double> wronskian_residual;
  // One-sided coefficient values at the nodes: *_r from the right, *_l from the left.
  std::vector<double> r_r, r_l, q_r, q_l;
  double x_ref = 0.0;
  std::optional<double> x0;
  std::size_t i_lo = 0, i_hi = 0;  // trimmed index range, inclusive
  double preroll_left = 0.0, preroll_right = 0.0;
  bool preroll_left_converged = false, preroll_right_converged = false;

  std::size_t size() const noexcept { return grid.size(); }
  double lo_trim() const { return grid[i_lo]; }
  double hi_trim() const { return grid[i_hi]; }
  bool contains(double x) const { return x >= L && x <= R; }

  /// Index i with grid[i] <= x <= grid[i+1].
  std::size_t cell(double x) const {
    if (!contains(x))
      throw ContractViolation("point " + detail::format_number(x) + " outside the FSS window [" +
                              detail::format_number(L) + ", " + detail::format_number(R) + "]");
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t j = static_cast<std::size_t>(it - grid.begin());
    if (j == 0) j = 1;
    if (j >= grid.size()) j = grid.size() - 1;
    return j - 1;
  }

  // Derivatives at the ends of cell i (left end uses right-sided values).
  double dlv(std::size_t i, bool left_end) const {
    return left_end ? s[i] / r_r[i] : s[i + 1] / r_l[i + 1];
  }
  double dlu(std::size_t i, bool left_end) const {
    return left_end ? sigma[i] / r_r[i] : sigma[i + 1] / r_l[i + 1];
  }
  double ds(std::size_t i, bool left_end) const {
    return left_end ? q_r[i] - s[i] * s[i] / r_r[i] : q_l[i + 1] - s[i + 1] * s[i + 1] / r_l[i + 1];
  }
  double dsigma(std::size_t i, bool left_end) const {
    return left_end ? q_r[i] - sigma[i] * sigma[i] / r_r[i]
                    : q_l[i + 1] - sigma[i + 1] * sigma[i + 1] / r_l[i + 1];
  }

  double log_v_at(double x) const {
    const std::size_t i = cell(x);
    return hermite(i, x, log_v[i], log_v[i + 1], dlv(i, true), dlv(i, false));
  }
  double log_u_at(double x) const {
    const std::size_t i = cell(x);
    return hermite(i, x, log_u[i], log_u[i + 1], dlu(i, true), dlu(i, false));
  }
  double log_rho_at(double x) const {
    const std::size_t i = cell(x);
    return hermite(i, x, log_rho[i], log_rho[i + 1], dlv(i, true) + dlu(i, true), dlv(i, false) + dlu(i, false));
  }
  double rho_at(double x) const { return std::exp(log_rho_at(x)); }
  double s_at(double x) const {
    const std::size_t i = cell(x);
    return hermite(i, x, s[i], s[i + 1], ds(i, true), ds(i, false));
  }
  double sigma_at(double x) const {
    const std::size_t i = cell(x);
    return hermite(i, x, sigma[i], sigma[i + 1], dsigma(i, true), dsigma(i, false));
  }

  /// Cubic Hermite on cell i through (f0, d0) and (f1, d1).
  double hermite(std::size_t i, double x, double f0, double f1, double d0, double d1) const {
    const double h = grid[i + 1] - grid[i];
    const double t = (x - grid[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
  }
};

namespace detail {

using State2 = std::array<double, 2>;

inline double one_sided(const Expression& e, double x, double dir) {
  return e(std::nextafter(x, dir > 0 ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity()));
}

/// Integrates y' = f(t, y) through the increasing `times`, recording the
/// state at each. The controlled stepper lands exactly on every time, so
/// no step straddles a node.
template <class Sys>
void integrate_through(Sys sys, State2 y, const std::vector<double>& times, std::vector<State2>* out, double rtol,
                       double atol, State2* final_state = nullptr) {
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State2>>(atol, rtol);
  if (out) out->clear();
  const double dt0 = times.size() > 1 ? (times[1] - times[0]) * 0.1 : 1.0;
  try {
    odeint::integrate_times(stepper, sys, y, times.begin(), times.end(), dt0,
                            [&](const State2& st, double) {
                              if (out) out->push_back(st);
                            });
  } catch (const std::exception& e) {
    throw NumericalError(std::string("Riccati integration failed: ") + e.what());
  }
  for (double v : y)
    if (!std::isfinite(v)) throw NumericalError("Riccati integration produced a non-finite value");
  if (final_state) *final_state = y;
}

inline std::vector<double> with_breakpoints(double a, double b, const std::vector<double>& bps) {
  std::vector<double> t{a};
  for (double x : bps)
    if (x > a && x < b) t.push_back(x);
  t.push_back(b);
  return t;
}

struct PrerollResult {
  double value = 0.0;
  double distance = 0.0;
  bool converged = false;
};

/// Slope at `edge` reached from a start `D` further out, D doubling until
/// the slope settles. `sign` = +1 for the forward slope s (start on the
/// left), -1 for the backward slope sigma (start on the right).
struct PrerollBudget {};  // not a std::exception, so it passes integrate_through

inline PrerollResult preroll(const Equation& eq, double edge, double span, int sign, const FssOptions& opt) {
  PrerollResult res;
  std::size_t evals = 0;
  auto spend = [&] {
    if (++evals > opt.preroll_max_evals) throw PrerollBudget{};
  };
  double D = std::max(1.0, span);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k <= opt.max_preroll_doublings; ++k, D *= 2.0) {
    const double start = edge - sign * D;
    const double q0 = eq.q(start), r0 = eq.r(start);
    State2 y{sign * std::sqrt(std::max(0.0, q0) * r0), 0.0};
    State2 end{};
    if (sign > 0) {
      auto sys = [&](const State2& st, State2& dy, double x) {
        spend();
        const double r = eq.r(x);
        dy[0] = eq.q(x) - st[0] * st[0] / r;
        dy[1] = 0.0;
      };
      try {
        integrate_through(sys, y, with_breakpoints(start, edge, eq.breakpoints()), nullptr, opt.rtol, opt.atol, &end);
      } catch (const PrerollBudget&) {
        if (k == 0) throw NumericalError("pre-roll budget exhausted before the first start");
        return res;
      }
    } else {
      // In tau = -x the backward slope obeys dsigma/dtau = -(q - sigma^2 / r).
      auto sys = [&](const State2& st, State2& dy, double tau) {
        spend();
        const double x = -tau;
        const double r = eq.r(x);
        dy[0] = -(eq.q(x) - st[0] * st[0] / r);
        dy[1] = 0.0;
      };
      std::vector<double> nb;
      for (double b : eq.breakpoints()) nb.push_back(-b);
      std::sort(nb.begin(), nb.end());
      try {
        integrate_through(sys, y, with_breakpoints(-start, -edge, nb), nullptr, opt.rtol, opt.atol, &end);
      } catch (const PrerollBudget&) {
        if (k == 0) throw NumericalError("pre-roll budget exhausted before the first start");
        return res;
      }
    }
    const double v = end[0];
    res.value = v;
    res.distance = D;
    if (std::isfinite(prev)) {
      const double diff = std::fabs(v - prev);
      const double r_edge = eq.r(edge);
      if (diff <= opt.preroll_tol * std::fabs(v) || diff * span / r_edge <= opt.preroll_tol || diff == 0.0) {
        res.converged = true;
        return res;
      }
    }
    prev = v;
  }
  return res;
}

}  // namespace detail

/// Forward Riccati slope s = r v'/v on the grid, started from the converged
/// pre-roll value at grid.front(). Returns (s, log_v) with log_v(front) = 0.
inline std::pair<std::vector<double>, std::vector<double>> integrate_riccati(const Equation& eq,
                                                                             const std::vector<double>& grid,
                                                                             double s_start, const FssOptions& opt) {
  std::vector<detail::State2> out;
  auto sys = [&eq](const detail::State2& st, detail::State2& dy, double x) {
    const double r = eq.r(x);
    dy[0] = eq.q(x) - st[0] * st[0] / r;
    dy[1] = st[0] / r;
  };
  detail::integrate_through(sys, {s_start, 0.0}, grid, &out, opt.rtol, opt.atol);
  std::vector<double> s(grid.size()), lv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s[i] = out[i][0];
    lv[i] = out[i][1];
  }
  return {s, lv};
}

/// Builds the fundamental system on the window grid (which must be
/// increasing; breakpoints are merged in).
inline FssTable build_fss(const Equation& eq, std::vector<double> grid, const FssOptions& opt = {}) {
  if (grid.size() < 8) throw ContractViolation("build_fss: need at least 8 grid points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ContractViolation("build_fss: grid must be strictly increasing");
  grid = merge_points(grid, eq.breakpoints());
  const std::size_t n = grid.size();
  FssTable t;
  t.L = grid.front();
  t.R = grid.back();
  t.grid = grid;
  const double span = t.R - t.L;

  const auto left = detail::preroll(eq, t.L, span, +1, opt);
  const auto right = detail::preroll(eq, t.R, span, -1, opt);
  t.preroll_left = left.distance;
  t.preroll_right = right.distance;
  t.preroll_left_converged = left.converged;
  t.preroll_right_converged = right.converged;

  auto [s, lv] = integrate_riccati(eq, grid, left.value, opt);

  // Backward pass in tau = -x for sigma = r u'/u and log u.
  std::vector<double> taus(n);
  for (std::size_t i = 0; i < n; ++i) taus[i] = -grid[n - 1 - i];
  std::vector<detail::State2> back;
  auto bsys = [&eq](const detail::State2& st, detail::State2& dy, double tau) {
    const double x = -tau;
    const double r = eq.r(x);
    dy[0] = -(eq.q(x) - st[0] * st[0] / r);
    dy[1] = -st[0] / r;
  };
  detail::integrate_through(bsys, {right.value, 0.0}, taus, &back, opt.rtol, opt.atol);
  std::vector<double> sigma(n), lu(n);
  for (std::size_t i = 0; i < n; ++i) {
    sigma[n - 1 - i] = back[i][0];
    lu[n - 1 - i] = back[i][1];
  }

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max({scale, std::fabs(s[i]), std::fabs(sigma[i])});
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] < -1e-8 * scale)
      throw NumericalError("forward slope became negative at x = " + detail::format_number(grid[i]));
    if (sigma[i] > 1e-8 * scale)
      throw NumericalError("backward slope became positive at x = " + detail::format_number(grid[i]));
    s[i] = std::max(0.0, s[i]);
    sigma[i] = std::min(0.0, sigma[i]);
    if (!(s[i] - sigma[i] > 0.0))
      throw NumericalError("slopes coincide at x = " + detail::format_number(grid[i]) + "; extend the window");
  }

  t.r_r.resize(n);
  t.r_l.resize(n);
  t.q_r.resize(n);
  t.q_l.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.r_r[i] = detail::one_sided(eq.pair().r, grid[i], +1);
    t.r_l[i] = detail::one_sided(eq.pair().r, grid[i], -1);
    t.q_r[i] = detail::one_sided(eq.pair().q, grid[i], +1);
    t.q_l[i] = detail::one_sided(eq.pair().q, grid[i], -1);
  }
  t.s = std::move(s);
  t.sigma = std::move(sigma);

  t.log_rho.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.log_rho[i] = -std::log(t.s[i] - t.sigma[i]);

  t.x_ref = (t.L <= 0.0 && t.R >= 0.0) ? 0.0 : 0.5 * (t.L + t.R);
  const std::size_t k = t.cell(t.x_ref);
  // Values at x_ref by Hermite interpolation of the raw shooting logs.
  const double half_log_rho_ref = 0.5 * t.log_rho_at(t.x_ref);
  const double lv_ref = t.hermite(k, t.x_ref, lv[k], lv[k + 1], t.dlv(k, true), t.dlv(k, false));
  const double lu_ref = t.hermite(k, t.x_ref, lu[k], lu[k + 1], t.dlu(k, true), t.dlu(k, false));

  t.log_v.resize(n);
  t.log_u.resize(n);
  t.log_u_shoot.resize(n);
  t.wronskian_residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.log_v[i] = lv[i] - lv_ref + half_log_rho_ref;
    t.log_u_shoot[i] = lu[i] - lu_ref + half_log_rho_ref;
    t.log_u[i] = t.log_rho[i] - t.log_v[i];
    t.wronskian_residual[i] = std::fabs(std::expm1(t.log_v[i] + t.log_u_shoot[i] - t.log_rho[i]));
  }

  // Phase by 4-point Gauss-Legendre on each cell with Hermite slopes.
  static constexpr double gx[4] = {-0.861136311594052575224, -0.339981043584856264803, 0.339981043584856264803,
                                   0.861136311594052575224};
  static constexpr double gw[4] = {0.347854845137453857373, 0.652145154862546142627, 0.652145154862546142627,
                                   0.347854845137453857373};
  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = grid[i], b = grid[i + 1];
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double x = c + hw * gx[j];
      const double sv = t.hermite(i, x, t.s[i], t.s[i + 1], t.ds(i, true), t.ds(i, false));
      const double sg = t.hermite(i, x, t.sigma[i], t.sigma[i + 1], t.dsigma(i, true), t.dsigma(i, false));
      sum += gw[j] * (sv - sg) / eq.r(x);
    }
    cum[i + 1] = cum[i] + sum * hw;
  }
  // Shift so that the phase vanishes at x_ref.
  {
    const double a = grid[k], x = t.x_ref;
    double part = 0.0;
    if (x > a) {
      const double c = 0.5 * (a + x), hw = 0.5 * (x - a);
      for (int j = 0; j < 4; ++j) {
        const double y = c + hw * gx[j];
        const double sv = t.hermite(k, y, t.s[k], t.s[k + 1], t.ds(k, true), t.ds(k, false));
        const double sg = t.hermite(k, y, t.sigma[k], t.sigma[k + 1], t.dsigma(k, true), t.dsigma(k, false));
        part += gw[j] * (sv - sg) / eq.r(y);
      }
      part *= hw;
    }
    const double ref = cum[k] + part;
    t.phase.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.phase[i] = cum[i] - ref;
  }

  const double trim = std::clamp(opt.trim, 0.0, 0.45) * span;
  t.i_lo = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), t.L + trim) - grid.begin());
  t.i_hi = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), t.R - trim) - grid.begin());
  if (t.i_hi > 0) --t.i_hi;
  if (t.i_hi <= t.i_lo) {
    t.i_lo = 0;
    t.i_hi = n - 1;
  }

  // x0: crossing of log_u - log_v.
  {
    auto g = [&](double x) { return t.log_u_at(x) - t.log_v_at(x); };
    double a = t.L, b = t.R;
    if (g(a) > 0.0 && g(b) < 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        (g(m) > 0.0 ? a : b) = m;
      }
      t.x0 = 0.5 * (a + b);
    }
  }
  return t;
}

/// u(max(x, t)) v(min(x, t)).
inline double green_kernel(const FssTable& f, double x, double t) {
  const double hi = std::max(x, t), lo = std::min(x, t);
  return std::exp(f.log_u_at(hi) + f.log_v_at(lo));
}

/// sqrt(rho(x) rho(t)) exp(-|phase(x) - phase(t)| / 2), the same kernel in
/// terms of rho and the phase.
inline double green_kernel_rho_form(const FssTable& f, double x, double t) {
  auto phase_at = [&](double y) {
    const std::size_t i = f.cell(y);
    auto d = [&](std::size_t j, bool left) {
      return left ? (f.s[j] - f.sigma[j]) / f.r_r[j] : (f.s[j + 1] - f.sigma[j + 1]) / f.r_l[j + 1];
    };
    return f.hermite(i, y, f.phase[i], f.phase[i + 1], d(i, true), d(i, false));
  };
  return std::exp(0.5 * (f.log_rho_at(x) + f.log_rho_at(t)) - 0.5 * std::fabs(phase_at(x) - phase_at(t)));
}

struct InequalityCheck {
  std::string name;
  bool evaluated = false;
  std::size_t points = 0, passed = 0;
  double fraction = 0.0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_x = std::numeric_limits<double>::quiet_NaN();
  double lower = 0.0, upper = 0.0;  // band constants

  void add(double x, double value, double lo_bound, double hi_bound) {
    ++points;
    const double m = std::min(value / lo_bound - 1.0, 1.0 - value / hi_bound);
    if (m >= 0.0) ++passed;
    if (m < worst_margin) {
      worst_margin = m;
      worst_x = x;
    }
    fraction = static_cast<double>(passed) / static_cast<double>(points);
  }
};

struct InequalityReport {
  std::vector<InequalityCheck> checks;
  std::size_t skipped = 0;  // profile points outside the trimmed window or in gaps
};

/// Checks the two-sided bounds linking v, u, rho to phi, psi, h, d and d~
/// at every profile point inside the trimmed FSS window.
inline InequalityReport check_otelbaev(const AuxiliaryProfile& p, const FssTable& f, bool r_is_one) {
  InequalityReport rep;
  const double e2 = std::exp(2.0);
  InequalityCheck slope_v{"slope_v_phi", true}, slope_u{"slope_u_psi", true}, rho_h{"rho_h", true},
      rho_dt{"rho_d_tilde", r_is_one}, rho_local{"rho_local", true}, rho_d{"rho_d", r_is_one};
  slope_v.lower = slope_u.lower = rho_h.lower = 0.5;
  slope_v.upper = slope_u.upper = rho_h.upper = 2.0;
  rho_dt.lower = 0.25;
  rho_dt.upper = 1.5;
  rho_local.lower = 1.0 / e2;
  rho_local.upper = e2;
  rho_d.lower = 0.5 / e2;
  rho_d.upper = 2.0 * e2;
  const double lo = f.lo_trim(), hi = f.hi_trim();
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double x = p.grid[i];
    if (p.gap[i] || x < lo || x > hi) {
      ++rep.skipped;
      continue;
    }
    const double rho = f.rho_at(x);
    // r v' phi / v = s phi and r |u'| psi / u = |sigma| psi.
    slope_v.add(x, f.s_at(x) * p.phi[i], 0.5, 2.0);
    slope_u.add(x, std::fabs(f.sigma_at(x)) * p.psi[i], 0.5, 2.0);
    rho_h.add(x, rho / p.h[i], 0.5, 2.0);
    if (r_is_one) {
      rho_dt.add(x, rho / p.d_tilde[i], 0.25, 1.5);
      rho_d.add(x, rho / p.d[i], 0.5 / e2, 2.0 * e2);
    }
    // rho(t) / rho(x) over [x - d, x + d], sampled at 17 points plus grid nodes.
    const double a = std::max(f.L, x - p.d[i]), b = std::min(f.R, x + p.d[i]);
    double worst_lo = 1.0, worst_hi = 1.0;
    auto probe = [&](double t) {
      const double ratio = f.rho_at(t) / rho;
      worst_lo = std::min(worst_lo, ratio);
      worst_hi = std::max(worst_hi, ratio);
    };
    for (int j = 0; j <= 16; ++j) probe(a + (b - a) * j / 16.0);
    for (auto it = std::upper_bound(f.grid.begin(), f.grid.end(), a); it != f.grid.end() && *it < b; ++it) probe(*it);
    const double m_lo = worst_lo * e2 - 1.0, m_hi = 1.0 - worst_hi / e2;
    rho_local.add(x, m_lo < m_hi ? worst_lo : worst_hi, 1.0 / e2, e2);
  }
  rep.checks = {slope_v, slope_u, rho_h, rho_local, rho_dt, rho_d};
  return rep;
}

}  // namespace slp
