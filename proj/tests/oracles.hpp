#pragma once

// Reference computations kept apart from the library: closed forms and
// brute-force numerics that share no code with include/slp.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Plain bisection for an increasing g on [lo, hi] with g(lo) < 0 < g(hi).
inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double m = 0.5 * (lo + hi);
    (g(m) < 0.0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

/// Scan then refine: first eta on a step grid where g changes sign.
inline double scan_root(const std::function<double(double)>& g, double step, double max_eta) {
  double prev = step;
  for (double eta = step; eta <= max_eta; eta += step) {
    if (g(eta) >= 0.0) return bisect(g, prev, eta);
    prev = eta;
  }
  return std::nan("");
}

// r = 1 on [-1, 1], x^2 outside.
inline double r_x2(double x) { return std::fabs(x) <= 1.0 ? 1.0 : x * x; }

/// Antiderivative of 1/r_x2 anchored at 0.
inline double inv_r_x2_primitive(double x) {
  const double ax = std::fabs(x);
  const double v = ax <= 1.0 ? ax : 2.0 - 1.0 / ax;
  return x < 0 ? -v : v;
}

/// theta(x) = |x| * (int_{-inf}^x 1/r)(int_x^inf 1/r) for r_x2.
inline double theta_x2(double x) {
  const double left = 2.0 + inv_r_x2_primitive(x);
  const double right = 2.0 - inv_r_x2_primitive(x);
  return std::fabs(x) * left * right;
}

// q = 1 on [-1, 1], |x|^{-1/2} outside.
inline double q_47(double x) { return std::fabs(x) <= 1.0 ? 1.0 : 1.0 / std::sqrt(std::fabs(x)); }

inline double q_47_primitive(double x) {
  const double ax = std::fabs(x);
  const double v = ax <= 1.0 ? ax : 1.0 + 2.0 * (std::sqrt(ax) - 1.0);
  return x < 0 ? -v : v;
}

inline double q_cos_alpha(double x, double alpha) { return 1.0 + std::cos(std::pow(std::fabs(x), alpha)); }

/// Kernel of -y'' + lambda^2 y with the normalised Wronskian.
inline double constant_kernel(double lambda, double x, double t) {
  return std::exp(-lambda * std::fabs(x - t)) / (2.0 * lambda);
}

inline double dual(double p) { return p / (p - 1.0); }

/// Phi_2 for r = 1, q = lambda^2.
inline double constant_phi(double lambda, double p) {
  const double pp = dual(p);
  return 1.0 / (2.0 * lambda * lambda * std::pow(p, 1.0 / p) * std::pow(pp, 1.0 / pp));
}

}  // namespace oracle
