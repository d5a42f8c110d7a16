#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "slp/coefficients.hpp"
#include "slp/grid.hpp"
#include "slp/parallel.hpp"
#include "slp/quad.hpp"
#include "slp/roots.hpp"

namespace slp {

// Left and right local equations: F1(eta) = int 1/r * int q over [x - eta, x],
// F2 the same over [x, x + eta]. Both are non-decreasing in eta.
inline double F1(const Equation& eq, double x, double eta) {
  return eq.int_inv_r(x - eta, x) * eq.int_q(x - eta, x);
}
inline double F2(const Equation& eq, double x, double eta) {
  return eq.int_inv_r(x, x + eta) * eq.int_q(x, x + eta);
}

inline RootOptions root_options(double tol) {
  RootOptions o;
  o.tol = tol;
  return o;
}

/// Bracket ceiling for d1, d2 and d~ at x: scales beyond 1e15 (1 + |x|) are
/// reported as failures instead of being chased to overflow.
inline RootOptions scale_root_options(double tol, double x) {
  RootOptions o = root_options(tol);
  o.max_eta = 1e15 * (1.0 + std::fabs(x));
  return o;
}

inline double solve_d1(const Equation& eq, double x, double tol, double eta0 = 1.0) {
  return solve_monotone([&](double e) { return F1(eq, x, e); }, eta0, scale_root_options(tol, x), "F1");
}

inline double solve_d2(const Equation& eq, double x, double tol, double eta0 = 1.0) {
  return solve_monotone([&](double e) { return F2(eq, x, e); }, eta0, scale_root_options(tol, x), "F2");
}

struct LocalScales {
  double d1 = 0.0, d2 = 0.0;
  double phi = 0.0, psi = 0.0, h = 0.0;
  double identity = 0.0;  // h * int_{x-d1}^{x+d2} q - 1
};

inline LocalScales phi_psi_h(const Equation& eq, double x, double tol, double eta1 = 1.0, double eta2 = 1.0) {
  LocalScales s;
  s.d1 = solve_d1(eq, x, tol, eta1);
  s.d2 = solve_d2(eq, x, tol, eta2);
  s.phi = eq.int_inv_r(x - s.d1, x);
  s.psi = eq.int_inv_r(x, x + s.d2);
  s.h = s.phi * s.psi / (s.phi + s.psi);
  s.identity = s.h * eq.int_q(x - s.d1, x + s.d2) - 1.0;
  return s;
}

/// Root of eta * int_{x-eta}^{x+eta} q = 2; defined for r = 1 only.
inline double solve_d_tilde(const Equation& eq, double x, double tol, double eta0 = 1.0) {
  if (!eq.r_is_one()) throw ContractViolation("solve_d_tilde requires r = 1");
  return solve_monotone([&](double e) { return 0.5 * e * eq.int_q(x - e, x + e); }, eta0,
                        scale_root_options(tol, x), "d~ equation");
}

struct HFieldOptions {
  double root_tol = 1e-11;
  double interp_tol = 1e-5;     // accepted midpoint error in log h
  std::size_t initial_nodes = 1025;
  int max_depth = 30;
  std::size_t max_nodes = 200000;  // refinement stops at this budget
  std::size_t workers = 1;
};

/// h sampled on an adaptive node set over [lo, hi] and interpolated by
/// cubic Hermite in log h with three-point slopes. Carries the
/// antiderivative of 1/(r h).
class HField {
 public:
  HField(const Equation& eq, double lo, double hi, const HFieldOptions& opt = {}) : eq_(&eq) {
    if (!(lo < hi)) throw ContractViolation("HField: need lo < hi");
    build(lo, hi, opt);
  }

  /// A field with h given in closed form; used for tests and exact cases.
  HField(const Equation& eq, double lo, double hi, const std::function<double(double)>& h, std::size_t n) : eq_(&eq) {
    auto data = std::make_shared<Data>();
    for (double x : merge_points(uniform_grid(lo, hi, n), eq.breakpoints())) {
      data->x.push_back(x);
      data->log_h.push_back(std::log(h(x)));
    }
    data->slope = slopes(data->x, data->log_h);
    data_ = data;
    make_primitive();
  }

  double lo() const noexcept { return data_->x.front(); }
  double hi() const noexcept { return data_->x.back(); }
  std::size_t gaps() const noexcept { return gaps_; }
  /// True when refinement stopped at the node budget before reaching interp_tol.
  bool truncated() const noexcept { return truncated_; }
  const std::vector<double>& nodes() const noexcept { return data_->x; }
  const std::vector<double>& log_h() const noexcept { return data_->log_h; }

  double operator()(double x) const { return std::exp(log_h_at(*data_, x)); }

  /// Integral of 1/(r h) over [a, b], both inside the domain.
  double rh_integral(double a, double b) const { return primitive_->between(a, b); }
  const Primitive& primitive() const noexcept { return *primitive_; }

  /// Root of F3(eta) = int_{x-eta}^{x+eta} dt/(r h) = 1.
  double solve_d(double x, double tol, double eta0 = 0.0) const {
    if (x <= lo() || x >= hi())
      throw NumericalError("d requested at " + detail::format_number(x) + " outside the h domain [" +
                           detail::format_number(lo()) + ", " + detail::format_number(hi()) + "]");
    RootOptions o = root_options(tol);
    o.max_eta = std::min(x - lo(), hi() - x);
    if (!(eta0 > 0.0)) eta0 = std::min(0.25 * (*this)(x) * eq_->r(x), 0.5 * o.max_eta);
    return solve_monotone([&](double e) { return rh_integral(x - e, x + e); }, eta0, o, "F3");
  }

 private:
  struct Data {
    std::vector<double> x, log_h, slope;
  };
  struct Node {
    double x;
    bool ok = false;
    LocalScales s;
  };

  /// Weighted three-point slopes; one-sided secants at the ends.
  static std::vector<double> slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || i + 1 == n) {
        const std::size_t j = i == 0 ? 0 : n - 2;
        d[i] = (y[j + 1] - y[j]) / (x[j + 1] - x[j]);
        continue;
      }
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double s0 = (y[i] - y[i - 1]) / h0, s1 = (y[i + 1] - y[i]) / h1;
      d[i] = (h1 * s0 + h0 * s1) / (h0 + h1);
    }
    return d;
  }

  static double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
    const double h = x1 - x0, t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
  }

  static double log_h_at(const Data& d, double x) {
    const auto& xs = d.x;
    if (x < xs.front() || x > xs.back())
      throw NumericalError("h queried at " + detail::format_number(x) + " outside [" +
                           detail::format_number(xs.front()) + ", " + detail::format_number(xs.back()) + "]");
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t j = it == xs.end() ? xs.size() - 1 : static_cast<std::size_t>(it - xs.begin());
    if (j == 0) j = 1;
    return hermite(xs[j - 1], xs[j], d.log_h[j - 1], d.log_h[j], d.slope[j - 1], d.slope[j], x);
  }

  void evaluate(std::vector<Node>& pts, const std::vector<const Node*>& warm, const HFieldOptions& opt) const {
    parallel_for(pts.size(), opt.workers, [&](std::size_t i) {
      const Node* w = warm[i];
      try {
        pts[i].s = phi_psi_h(*eq_, pts[i].x, opt.root_tol, w ? w->s.d1 : 1.0, w ? w->s.d2 : 1.0);
        pts[i].ok = std::isfinite(pts[i].s.h) && pts[i].s.h > 0.0;
      } catch (const Error&) {
        pts[i].ok = false;
      }
    });
  }

  void build(double lo, double hi, const HFieldOptions& opt) {
    const double scale = std::max(1.0, (hi - lo) / 1000.0);
    std::vector<Node> nodes;
    for (double x : merge_points(sinh_grid(lo, hi, std::max<std::size_t>(opt.initial_nodes, 3), scale),
                                 eq_->breakpoints()))
      nodes.push_back({x});
    // Initial nodes start cold and midpoints warm-start from their left
    // neighbour, so the result does not depend on the worker count.
    evaluate(nodes, std::vector<const Node*>(nodes.size(), nullptr), opt);

    // refine[i] >= 0 marks the interval (i, i+1) for splitting at that depth.
    std::vector<int> refine(nodes.size() - 1, -1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      if (nodes[i].ok && nodes[i + 1].ok) refine[i] = 0;
    for (;;) {
      // Cubic prediction uses the ok nodes present before this level.
      std::vector<double> ox, oy;
      std::vector<std::size_t> pos(nodes.size(), 0);
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].ok) {
          pos[i] = ox.size();
          ox.push_back(nodes[i].x);
          oy.push_back(std::log(nodes[i].s.h));
        }
      const auto od = slopes(ox, oy);

      std::vector<Node> mids;
      std::vector<const Node*> warm;
      std::vector<std::size_t> which;
      for (std::size_t i = 0; i < refine.size(); ++i)
        if (refine[i] >= 0) {
          mids.push_back({0.5 * (nodes[i].x + nodes[i + 1].x)});
          warm.push_back(&nodes[i]);
          which.push_back(i);
        }
      if (mids.empty()) break;
      if (nodes.size() + mids.size() > opt.max_nodes) {
        truncated_ = true;
        break;
      }
      evaluate(mids, warm, opt);

      std::vector<Node> merged;
      std::vector<int> next;
      merged.reserve(nodes.size() + mids.size());
      std::size_t k = 0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        merged.push_back(nodes[i]);
        if (i + 1 == nodes.size()) break;
        if (k < which.size() && which[k] == i) {
          const Node& m = mids[k];
          int split = -1;
          if (m.ok) {
            const std::size_t a = pos[i], b = pos[i + 1];
            const double pred = hermite(ox[a], ox[b], oy[a], oy[b], od[a], od[b], m.x);
            const double err = std::fabs(std::log(m.s.h) - pred);
            const double width = nodes[i + 1].x - nodes[i].x;
            if (err > opt.interp_tol && refine[i] < opt.max_depth &&
                width > 1e-9 * std::max(1.0, std::fabs(m.x)))
              split = refine[i] + 1;
          }
          merged.push_back(m);
          next.push_back(m.ok ? split : -1);
          next.push_back(m.ok ? split : -1);
          ++k;
        } else {
          next.push_back(-1);
        }
      }
      nodes = std::move(merged);
      refine = std::move(next);
    }

    auto data = std::make_shared<Data>();
    for (const auto& n : nodes) {
      if (!n.ok) {
        ++gaps_;
        continue;
      }
      data->x.push_back(n.x);
      data->log_h.push_back(std::log(n.s.h));
    }
    if (data->x.size() < 2) throw NumericalError("h could not be computed on the requested domain");
    data->slope = slopes(data->x, data->log_h);
    data_ = data;
    make_primitive();
  }

  void make_primitive() {
    auto data = data_;
    const Equation* eq = eq_;
    std::vector<double> bps = data->x;
    for (double b : eq->breakpoints())
      if (b > bps.front() && b < bps.back()) bps.push_back(b);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    Field f{"1/(r h)", [data, eq](double x) { return std::exp(-log_h_at(*data, x)) / eq->r(x); }, std::move(bps)};
    const double anchor = (lo() <= 0.0 && hi() >= 0.0) ? 0.0 : 0.5 * (lo() + hi());
    primitive_ = std::make_shared<Primitive>(std::move(f), anchor, 1e-13, lo(), hi());
  }

  const Equation* eq_;
  std::shared_ptr<const Data> data_;
  std::shared_ptr<Primitive> primitive_;
  std::size_t gaps_ = 0;
  bool truncated_ = false;
};

struct AuxOptions {
  double tol = 1e-10;
  double margin = -1.0;  // h domain padding; negative selects max(1, max|window end|)
  HFieldOptions h;
  std::size_t workers = 1;
};

struct AuxiliaryProfile {
  std::vector<double> grid, d1, d2, phi, psi, h, d, hd, d_tilde, identity;
  std::vector<bool> gap;
  std::vector<std::string> notes;  // one per gap, "x: message"
  std::size_t gaps = 0;
  double h_lo = 0.0, h_hi = 0.0;
  std::size_t h_nodes = 0, h_gaps = 0;
  bool h_truncated = false;
};

inline double default_margin(double a, double b) { return std::max({1.0, std::fabs(a), std::fabs(b)}); }

/// Per-point auxiliary functions. Failures are recorded as gaps.
inline AuxiliaryProfile build_profile(const Equation& eq, const std::vector<double>& grid, const HField& hf,
                                      const AuxOptions& opt = {}) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ContractViolation("build_profile: grid must be increasing");
  const std::size_t n = grid.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  AuxiliaryProfile p;
  p.grid = grid;
  for (auto* col : {&p.d1, &p.d2, &p.phi, &p.psi, &p.h, &p.d, &p.hd, &p.d_tilde, &p.identity}) col->assign(n, nan);
  p.gap.assign(n, false);
  std::vector<std::string> msg(n);
  p.h_lo = hf.lo();
  p.h_hi = hf.hi();
  p.h_nodes = hf.nodes().size();
  p.h_gaps = hf.gaps();
  p.h_truncated = hf.truncated();

  const bool serial = opt.workers <= 1;
  auto solve_point = [&](std::size_t i, const LocalScales* warm) {
    const double x = grid[i];
    try {
      const auto s = phi_psi_h(eq, x, opt.tol, warm ? warm->d1 : 1.0, warm ? warm->d2 : 1.0);
      p.d1[i] = s.d1;
      p.d2[i] = s.d2;
      p.phi[i] = s.phi;
      p.psi[i] = s.psi;
      p.h[i] = s.h;
      p.identity[i] = s.identity;
      p.d[i] = hf.solve_d(x, opt.tol, serial && i > 0 && std::isfinite(p.d[i - 1]) ? p.d[i - 1] : 0.0);
      p.hd[i] = p.h[i] * p.d[i];
      if (eq.r_is_one()) p.d_tilde[i] = solve_d_tilde(eq, x, opt.tol, s.d1);
    } catch (const Error& e) {
      p.gap[i] = true;
      msg[i] = detail::format_number(x) + ": " + e.what();
    }
  };
  if (serial) {
    LocalScales prev;
    bool have = false;
    for (std::size_t i = 0; i < n; ++i) {
      solve_point(i, have ? &prev : nullptr);
      have = !p.gap[i];
      if (have) prev = {p.d1[i], p.d2[i], 0, 0, 0, 0};
    }
  } else {
    parallel_for(n, opt.workers, [&](std::size_t i) { solve_point(i, nullptr); });
  }
  for (std::size_t i = 0; i < n; ++i)
    if (p.gap[i]) {
      ++p.gaps;
      p.notes.push_back(msg[i]);
    }
  return p;
}

inline AuxiliaryProfile build_profile(const Equation& eq, const std::vector<double>& grid, const AuxOptions& opt = {}) {
  if (grid.size() < 2) throw ContractViolation("build_profile: need at least two grid points");
  const double m = opt.margin >= 0.0 ? opt.margin : default_margin(grid.front(), grid.back());
  HFieldOptions ho = opt.h;
  ho.workers = opt.workers;
  HField hf(eq, grid.front() - m, grid.back() + m, ho);
  return build_profile(eq, grid, hf, opt);
}

struct Segment {
  int n;
  double lo, x, hi;
  double rh_from_base;  // int of 1/(r h) from the base point to the inner end
};

struct Covering {
  double base_x = 0.0;
  std::vector<Segment> segments;  // ordered by n: -1, -2, ..., then 1, 2, ...
  bool truncated = false;
  std::string note;
};

/// Segments [x_n - d(x_n), x_n + d(x_n)] abutting at base_x and extending
/// until they leave [a, b].
inline Covering build_covering(const HField& hf, double base_x, double a, double b, double tol,
                               std::size_t max_segments = 100000) {
  if (!(a <= base_x && base_x <= b)) throw ContractViolation("build_covering: base must lie in the window");
  Covering cov;
  cov.base_x = base_x;
  const double dtol = std::min(1e-3, tol * 1e-3);
  auto d_at = [&](double s) { return hf.solve_d(s, dtol); };

  auto run = [&](int sign) {
    double edge = base_x;
    for (int n = 1; static_cast<std::size_t>(n) <= max_segments; ++n) {
      if (sign > 0 ? edge >= b : edge <= a) return;
      double xn;
      try {
        const double d0 = d_at(edge);
        // sign * (x - edge) = t; solve t - d(edge + sign t) = 0.
        const double t = solve_crossing([&](double t) { return t - d_at(edge + sign * t); }, 0.0, d0,
                                        tol * 1e-3, hf.hi() - hf.lo());
        xn = edge + sign * t;
        const double dn = d_at(xn);
        Segment s{sign * n, xn - dn, xn, xn + dn, 0.0};
        const double inner = sign > 0 ? s.lo : s.hi;
        s.rh_from_base = std::fabs(hf.rh_integral(std::min(base_x, inner), std::max(base_x, inner)));
        cov.segments.push_back(s);
        edge = sign > 0 ? s.hi : s.lo;
      } catch (const Error& e) {
        cov.truncated = true;
        cov.note += std::string(sign > 0 ? "right" : "left") + " side stopped at " + detail::format_number(edge) +
                    ": " + e.what() + "; ";
        return;
      }
    }
    cov.truncated = true;
    cov.note += "segment cap reached; ";
  };
  run(-1);
  run(+1);
  return cov;
}

}  // namespace slp
