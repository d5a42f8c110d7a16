#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "slp/error.hpp"
#include "slp/expr.hpp"

namespace slp {

struct RootOptions {
  double tol = 1e-12;        // target |F(eta) - 1|
  double max_eta = 1e300;    // bracket ceiling
  double min_eta = 1e-300;   // bracket floor
};

/// Solves F(eta) = 1 for a continuous non-decreasing F on eta > 0.
/// The bracket grows or shrinks by factors of 2 from `eta0` and is then
/// narrowed until |F - 1| <= tol / 8 with a relative width of at most tol,
/// or until it collapses to machine precision.
inline double solve_monotone(const std::function<double(double)>& F, double eta0, const RootOptions& opt,
                             const char* what = "F") {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) eta0 = 1.0;
  eta0 = std::min(eta0, opt.max_eta);
  double lo = 0.0, hi = 0.0;
  double f = F(eta0);
  if (f == 1.0) return eta0;
  if (f < 1.0) {
    lo = eta0;
    double eta = eta0;
    for (;;) {
      if (lo >= opt.max_eta)
        throw BracketError(std::string(what) + " stays below 1 up to eta = " + detail::format_number(lo) +
                               " (last value " + detail::format_number(f) + ")",
                           lo, f);
      eta = std::min(2.0 * eta, opt.max_eta);
      f = F(eta);
      if (f >= 1.0) {
        hi = eta;
        break;
      }
      lo = eta;
    }
  } else {
    hi = eta0;
    double eta = eta0;
    for (;;) {
      eta *= 0.5;
      if (eta < opt.min_eta) return eta;
      f = F(eta);
      if (f <= 1.0) {
        lo = eta;
        break;
      }
      hi = eta;
    }
  }
  if (f == 1.0) return lo > 0.0 && F(lo) == 1.0 ? lo : hi;
  if (lo == 0.0) return hi;
  // Illinois regula falsi on the bracket, with a bisection step whenever the
  // bracket fails to halve.
  double flo = F(lo) - 1.0, fhi = F(hi) - 1.0;
  double best = hi;
  int stale = 0;
  double width = hi - lo;
  for (int it = 0; it < 400; ++it) {
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      best = 0.5 * (lo + hi);
      break;
    }
    double mid = (flo * hi - fhi * lo) / (flo - fhi);
    const bool bisect = it % 3 == 2 && hi - lo > 0.5 * width;
    if (bisect || !(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    if (it % 3 == 2) width = hi - lo;
    const double fm = F(mid) - 1.0;
    best = mid;
    if (fm < 0.0) {
      lo = mid;
      flo = fm;
      if (stale == -1) fhi *= 0.5;
      stale = -1;
    } else {
      hi = mid;
      fhi = fm;
      if (stale == 1) flo *= 0.5;
      stale = 1;
    }
    if (std::fabs(fm) <= 0.125 * opt.tol && hi - lo <= opt.tol * hi) break;
  }
  return best;
}

/// Finds s >= start with g(s) = 0 for a continuous g with g(start) < 0,
/// stepping out by doubling `step` until g >= 0, then bisecting.
inline double solve_crossing(const std::function<double(double)>& g, double start, double step, double tol,
                             double max_distance = 1e300) {
  if (!(step > 0.0)) step = 1.0;
  double lo = start, hi = start;
  double dist = step;
  for (;;) {
    if (dist > max_distance) throw BracketError("crossing not bracketed", lo, g(lo));
    hi = start + dist;
    if (g(hi) >= 0.0) break;
    lo = hi;
    dist *= 2.0;
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= tol * std::max(1.0, std::fabs(mid))) break;
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace slp
