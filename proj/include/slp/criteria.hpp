#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "slp/aux.hpp"
#include "slp/coefficients.hpp"
#include "slp/estimate.hpp"

namespace slp {

enum class CertStatus { Pass, Fail, Inconclusive, NotApplicable };

inline const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::Pass: return "pass";
    case CertStatus::Fail: return "fail";
    case CertStatus::Inconclusive: return "inconclusive";
    default: return "not_applicable";
  }
}

struct Certificate {
  std::string name;  // B, A, m_a, theta, q0, necessary_q_tails, necessary_local_products
  CertStatus status = CertStatus::Inconclusive;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, double>> values;
  std::optional<BoundEstimate> estimate;
  std::string evidence;
};

struct CriteriaConfig {
  double a = -1000.0, b = 1000.0;  // largest window
  std::size_t doublings = 4;       // nested half-widths H / 2^k, k = doublings..0
  std::size_t grid_points = 2049;  // per nested window
  double tol = 1e-10;
  std::vector<double> m_scales{1.0, 2.0, 4.0};
  double tail_tol = 1e-10;
  double tail_cutoff = 1e12;
  double positive_floor = 1e-6;  // relative to the largest sample
  HFieldOptions h;
  std::size_t workers = 1;

  double center() const { return 0.5 * (a + b); }
  std::vector<double> half_widths() const {
    const double H = 0.5 * (b - a);
    std::vector<double> w;
    for (std::size_t k = doublings + 1; k-- > 0;) w.push_back(H / std::pow(2.0, static_cast<double>(k)));
    return w;
  }
  void validate() const {
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) throw ContractViolation("window must satisfy a < b");
    if (doublings < 3) throw ContractViolation("nested doublings must be at least 3");
    if (grid_points < 64) throw ContractViolation("grid must have at least 64 points");
    if (!(tol > 0.0) || tol > 1e-2) throw ContractViolation("tol must lie in (0, 1e-2]");
  }
};

/// Union of uniform grids on the nested windows, plus breakpoints inside.
inline std::vector<double> nested_grid(const CriteriaConfig& cfg, const std::vector<double>& breaks = {}) {
  std::vector<double> xs;
  const double c = cfg.center();
  for (double w : cfg.half_widths()) {
    auto g = uniform_grid(c - w, c + w, cfg.grid_points);
    xs.insert(xs.end(), g.begin(), g.end());
  }
  for (double x : breaks)
    if (x >= cfg.a && x <= cfg.b) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

namespace detail {

/// Refines interior local minima of sampled values with Brent's method on
/// the neighbouring cells; moved points stay between their neighbours.
template <class F>
void refine_minima(std::vector<double>& xs, std::vector<double>& vals, F&& f) {
  const std::size_t n = xs.size();
  std::vector<double> nx = xs, nv = vals;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1])) continue;
    if (std::isnan(vals[i])) continue;
    const double lo = 0.5 * (xs[i - 1] + xs[i]), hi = 0.5 * (xs[i] + xs[i + 1]);
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, 50);
    if (r.second < nv[i]) {
      nx[i] = r.first;
      nv[i] = r.second;
    }
  }
  xs = std::move(nx);
  vals = std::move(nv);
}

inline double largest_finite(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, std::fabs(x));
  return m;
}

inline CertStatus positive_status(const BoundEstimate& e, double scale, double floor) {
  if (e.trend == Trend::Undetermined || std::isnan(e.value)) return CertStatus::Inconclusive;
  const bool positive = e.value > floor * std::max(scale, std::numeric_limits<double>::min());
  return e.trend == Trend::BoundedBelow && positive ? CertStatus::Pass : CertStatus::Fail;
}

inline std::string describe(const BoundEstimate& e) {
  std::string s = std::string(e.infimum ? "inf" : "sup") + " " + detail::format_number(e.value) + " at x = " +
                  detail::format_number(e.arg_x) + " on [" + detail::format_number(e.a) + ", " + detail::format_number(e.b) +
                  "], trend " + to_string(e.trend) + ", grade " + e.grade;
  if (!e.note.empty()) s += "; " + e.note;
  return s;
}

}  // namespace detail

/// B = sup h d over nested windows.
inline BoundEstimate compute_B(const AuxiliaryProfile& prof, const std::vector<double>& half_widths, double center) {
  return nested_extremum(prof.grid, prof.hd, half_widths, center, false, &prof.gap);
}

/// Growth strong enough to count as B = infinity: growing over the last
/// three doublings and ten times the smallest-window value.
inline bool b_diverges(const BoundEstimate& b) {
  if (b.trend != Trend::Growing || b.evidence.empty()) return false;
  const double first = b.evidence.front().second;
  return !std::isfinite(b.value) || b.value > 10.0 * first;
}

/// A = inf (1/2d) int_{x-d}^{x+d} q.
inline BoundEstimate compute_A(const Equation& eq, const AuxiliaryProfile& prof, const std::vector<double>& half_widths,
                               double center) {
  std::vector<double> vals(prof.grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < prof.grid.size(); ++i) {
    if (prof.gap[i]) continue;
    const double x = prof.grid[i], d = prof.d[i];
    vals[i] = eq.int_q(x - d, x + d) / (2.0 * d);
  }
  return nested_extremum(prof.grid, vals, half_widths, center, true, &prof.gap);
}

/// m(a) = inf int_{x-a}^{x+a} q over the sample points, local minima refined.
inline BoundEstimate compute_m(const Equation& eq, double a, std::vector<double> xs,
                               const std::vector<double>& half_widths, double center) {
  if (!eq.r_is_one()) throw ContractViolation("m(a) is defined for r = 1 only");
  if (!(a > 0.0)) throw ContractViolation("m(a) needs a > 0");
  auto f = [&eq, a](double x) { return eq.int_q(x - a, x + a); };
  std::vector<double> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = f(xs[i]);
  detail::refine_minima(xs, vals, f);
  return nested_extremum(xs, vals, half_widths, center, true);
}

struct MScan {
  std::vector<double> scales;
  std::vector<BoundEstimate> estimates;
  std::vector<CertStatus> status;
  std::optional<std::size_t> first_pass;
};

inline MScan m_scan(const Equation& eq, const std::vector<double>& xs, const CriteriaConfig& cfg) {
  MScan s;
  const auto widths = cfg.half_widths();
  for (double a : cfg.m_scales) {
    auto est = compute_m(eq, a, xs, widths, cfg.center());
    std::vector<double> ev;
    for (const auto& e : est.evidence) ev.push_back(e.second);
    const auto st = detail::positive_status(est, detail::largest_finite(ev), cfg.positive_floor);
    s.scales.push_back(a);
    s.estimates.push_back(std::move(est));
    s.status.push_back(st);
    if (st == CertStatus::Pass) {
      s.first_pass = s.scales.size() - 1;
      break;
    }
  }
  return s;
}

struct ThetaResult {
  BoundEstimate estimate;
  TailClass inv_r_left, inv_r_right;  // tails of 1/r from 0
  TailClass q_left, q_right;          // tails of q from 0
  bool finite_tails = false;
  bool q_tails_divergent = false;
};

/// theta = sup |x| (int_{-inf}^x 1/r)(int_x^inf 1/r).
inline ThetaResult compute_theta(const Equation& eq, const std::vector<double>& xs,
                                 const std::vector<double>& half_widths, double center, const CriteriaConfig& cfg) {
  ThetaResult t;
  const auto& pair = eq.pair();
  t.inv_r_left = classify_tail(eq.inv_r_field(), Side::Left, cfg.tail_tol, cfg.tail_cutoff, 0.0, pair.left.inv_r);
  t.inv_r_right = classify_tail(eq.inv_r_field(), Side::Right, cfg.tail_tol, cfg.tail_cutoff, 0.0, pair.right.inv_r);
  t.q_left = classify_tail(eq.q_field(), Side::Left, cfg.tail_tol, cfg.tail_cutoff, 0.0, pair.left.q);
  t.q_right = classify_tail(eq.q_field(), Side::Right, cfg.tail_tol, cfg.tail_cutoff, 0.0, pair.right.q);
  t.q_tails_divergent =
      t.q_left.verdict == TailVerdict::Divergent && t.q_right.verdict == TailVerdict::Divergent;
  t.finite_tails =
      t.inv_r_left.verdict == TailVerdict::Convergent && t.inv_r_right.verdict == TailVerdict::Convergent;
  if (!t.finite_tails) {
    auto& e = t.estimate;
    const bool divergent =
        t.inv_r_left.verdict == TailVerdict::Divergent || t.inv_r_right.verdict == TailVerdict::Divergent;
    e.value = divergent ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
    e.trend = divergent ? Trend::Growing : Trend::Undetermined;
    e.a = center - half_widths.back();
    e.b = center + half_widths.back();
    e.note = divergent ? "1/r is not integrable at a tail; theta is infinite"
                       : "tails of 1/r undetermined; theta not evaluated";
    return t;
  }
  const double TL = t.inv_r_left.value, TR = t.inv_r_right.value;
  std::vector<double> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double P = eq.int_inv_r(0.0, x);
    vals[i] = std::fabs(x) * (TL + P) * (TR - P);
  }
  t.estimate = nested_extremum(xs, vals, half_widths, center, false);
  return t;
}

/// q0 = inf q over the samples, local minima refined.
inline BoundEstimate compute_q0(const Equation& eq, std::vector<double> xs, const std::vector<double>& half_widths,
                                double center) {
  std::vector<double> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = eq.q(xs[i]);
  detail::refine_minima(xs, vals, [&eq](double x) { return eq.q(x); });
  return nested_extremum(xs, vals, half_widths, center, true);
}

struct NecessaryReport {
  TailClass inv_r_left, inv_r_right;  // divergence of both is the standing hypothesis
  bool inv_r_divergent = false;
  Certificate q_tails, local_products;
};

namespace detail {

enum class ProductTrend { Divergent, Bounded, Undetermined };

/// int_{x-d}^x 1/r * int_{x-d}^x q for d = sign * 2^k.
inline ProductTrend product_trend(const Equation& eq, double x, double sign, double max_cutoff,
                                  std::vector<std::pair<double, double>>& ev) {
  int grow = 0, flat = 0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (double d = 1.0; d <= max_cutoff; d *= 2.0) {
    const double lo = sign > 0 ? x - d : x, hi = sign > 0 ? x : x + d;
    const double p = eq.int_inv_r(lo, hi) * eq.int_q(lo, hi);
    ev.emplace_back(sign * d, p);
    if (std::isfinite(prev)) {
      const double step = relative_step(prev, p);
      grow = step > kTrendGrowth ? grow + 1 : 0;
      flat = std::fabs(step) <= 1e-9 ? flat + 1 : 0;
      if (grow >= 4) return ProductTrend::Divergent;
      if (flat >= 2) return ProductTrend::Bounded;
    }
    prev = p;
  }
  return ProductTrend::Undetermined;
}

}  // namespace detail

/// Positivity of the q tails beyond the window ends, divergence of the
/// (1/r, q) products at five points, and divergence of the 1/r tails.
inline NecessaryReport check_necessary(const Equation& eq, const CriteriaConfig& cfg) {
  NecessaryReport rep;
  const auto& pair = eq.pair();
  rep.inv_r_left = classify_tail(eq.inv_r_field(), Side::Left, cfg.tail_tol, cfg.tail_cutoff, 0.0, pair.left.inv_r);
  rep.inv_r_right = classify_tail(eq.inv_r_field(), Side::Right, cfg.tail_tol, cfg.tail_cutoff, 0.0, pair.right.inv_r);
  rep.inv_r_divergent = rep.inv_r_left.verdict == TailVerdict::Divergent &&
                        rep.inv_r_right.verdict == TailVerdict::Divergent;

  auto& q_tails = rep.q_tails;
  q_tails.name = "necessary_q_tails";
  {
    const auto right = classify_tail(eq.q_field(), Side::Right, cfg.tail_tol, cfg.tail_cutoff, cfg.b);
    const auto left = classify_tail(eq.q_field(), Side::Left, cfg.tail_tol, cfg.tail_cutoff, cfg.a);
    auto positive = [](const TailClass& t) {
      for (const auto& e : t.evidence)
        if (e.second > 0.0) return true;
      return false;
    };
    const double lv = left.evidence.empty() ? 0.0 : left.evidence.back().second;
    const double rv = right.evidence.empty() ? 0.0 : right.evidence.back().second;
    q_tails.values = {{"left_tail_from", cfg.a}, {"left_tail_integral", lv}, {"right_tail_from", cfg.b},
                  {"right_tail_integral", rv}};
    const bool lp = positive(left), rp = positive(right);
    q_tails.value = std::min(lv, rv);
    q_tails.status = lp && rp ? CertStatus::Pass : CertStatus::Fail;
    q_tails.evidence = "integral of q beyond the left end " + detail::format_number(lv) + " (cutoff " +
                   detail::format_number(left.evidence.empty() ? 0.0 : left.evidence.back().first) +
                   "), beyond the right end " + detail::format_number(rv) + " (cutoff " +
                   detail::format_number(right.evidence.empty() ? 0.0 : right.evidence.back().first) + ")";
    if (!lp) q_tails.evidence += "; vanishes on the left";
    if (!rp) q_tails.evidence += "; vanishes on the right";
    for (const auto* t : {&left, &right})
      if (!t->note.empty()) q_tails.evidence += std::string("; ") + to_string(t->side) + ": " + t->note;
    // A side that failed before any increment proves nothing.
    if ((!lp && left.evidence.empty()) || (!rp && right.evidence.empty())) q_tails.status = CertStatus::Inconclusive;
  }

  auto& local_products = rep.local_products;
  local_products.name = "necessary_local_products";
  {
    const double c = cfg.center(), H = 0.5 * (cfg.b - cfg.a);
    int divergent = 0, bounded = 0, undetermined = 0;
    std::string where;
    for (double x : {c - H, c - 0.5 * H, c, c + 0.5 * H, c + H}) {
      for (double sign : {1.0, -1.0}) {
        std::vector<std::pair<double, double>> ev;
        detail::ProductTrend t;
        try {
          t = detail::product_trend(eq, x, sign, cfg.tail_cutoff, ev);
        } catch (const Error& e) {
          t = detail::ProductTrend::Undetermined;
          where += std::string(" error at x = ") + detail::format_number(x) + ": " + e.what() + ";";
        }
        if (t == detail::ProductTrend::Divergent) ++divergent;
        if (t == detail::ProductTrend::Bounded) {
          ++bounded;
          where += " bounded at x = " + detail::format_number(x) + (sign > 0 ? " (leftward)" : " (rightward)") + ";";
        }
        if (t == detail::ProductTrend::Undetermined) ++undetermined;
        local_products.values.emplace_back(std::string("x=") + detail::format_number(x) + (sign > 0 ? ",left" : ",right"),
                                ev.empty() ? 0.0 : ev.back().second);
      }
    }
    local_products.value = divergent;
    local_products.status = bounded ? CertStatus::Fail : undetermined ? CertStatus::Inconclusive : CertStatus::Pass;
    local_products.evidence = std::to_string(divergent) + " of 10 products divergent, " + std::to_string(bounded) +
                   " bounded, " + std::to_string(undetermined) + " undetermined;" + where;
  }
  return rep;
}

enum class Outcome { SolvableAllP, NotSolvable, Inconclusive };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::SolvableAllP: return "SolvableAllP";
    case Outcome::NotSolvable: return "NotSolvable";
    default: return "Inconclusive";
  }
}

struct Verdict {
  Outcome outcome = Outcome::Inconclusive;
  std::vector<Certificate> certificates;  // q0, theta, A, m_a, B, then the necessary conditions
  std::string dichotomy_note;
  std::string reason;
  ValidationReport validation;
  std::optional<NecessaryReport> necessary;
  std::optional<MScan> m;
  std::optional<AuxiliaryProfile> profile;
  std::vector<std::string> errors;

  const Certificate* find(const std::string& name) const {
    for (const auto& c : certificates)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline constexpr const char* kDichotomyNote =
    "The outcome does not depend on p: the equation is either correctly solvable in L_p for every p in (1, inf) "
    "or for none.";

/// Runs validation, the necessary conditions, the sufficient certificates
/// and B, then assembles the verdict.
inline Verdict decide(const CoefficientPair& pair, const CriteriaConfig& cfg) {
  cfg.validate();
  Verdict v;
  v.dichotomy_note = kDichotomyNote;
  try {
    v.validation = validate_coefficients(pair, cfg.a, cfg.b, cfg.grid_points);
  } catch (const Error& e) {
    v.errors.push_back(e.what());
    v.reason = std::string("validation failed: ") + e.what();
    return v;
  }
  if (!v.validation.ok()) {
    v.reason = "coefficients violate r > 0, q >= 0 or local integrability on the window";
    return v;
  }

  const Equation eq(pair, 1e-13);
  const auto widths = cfg.half_widths();
  const double c = cfg.center();
  const auto xs = nested_grid(cfg, eq.breakpoints());

  auto guarded = [&v](Certificate& cert, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      cert.status = CertStatus::Inconclusive;
      cert.evidence = e.what();
      v.errors.push_back(cert.name + ": " + e.what());
    }
  };

  Certificate q0{"q0"}, theta{"theta"}, A{"A"}, m{"m_a"}, B{"B"};
  NecessaryReport nec;
  bool have_nec = false;
  try {
    nec = check_necessary(eq, cfg);
    have_nec = true;
  } catch (const Error& e) {
    v.errors.push_back(std::string("necessary: ") + e.what());
    nec.q_tails = Certificate{"necessary_q_tails", CertStatus::Inconclusive};
    nec.local_products = Certificate{"necessary_local_products", CertStatus::Inconclusive};
    nec.q_tails.evidence = nec.local_products.evidence = e.what();
  }

  guarded(q0, [&] {
    auto est = compute_q0(eq, xs, widths, c);
    est.grade = "extrapolated";
    std::vector<double> s;
    for (std::size_t i = 0; i < xs.size(); ++i) s.push_back(eq.q(xs[i]));
    q0.status = detail::positive_status(est, detail::largest_finite(s), cfg.positive_floor);
    q0.value = est.value;
    q0.evidence = detail::describe(est);
    q0.estimate = est;
  });

  guarded(theta, [&] {
    auto t = compute_theta(eq, xs, widths, c, cfg);
    theta.value = t.estimate.value;
    theta.values = {{"int_inv_r_left", t.inv_r_left.value}, {"int_inv_r_right", t.inv_r_right.value},
                    {"q_tails_divergent", t.q_tails_divergent ? 1.0 : 0.0}};
    if (!t.finite_tails) {
      theta.status = t.estimate.trend == Trend::Growing ? CertStatus::Fail : CertStatus::Inconclusive;
    } else if (t.estimate.trend == Trend::Bounded) {
      theta.status = t.q_tails_divergent ? CertStatus::Pass : CertStatus::Inconclusive;
    } else {
      theta.status = t.estimate.trend == Trend::Growing ? CertStatus::Fail : CertStatus::Inconclusive;
    }
    theta.evidence = detail::describe(t.estimate) + "; q tails " + to_string(t.q_left.verdict) + " / " +
                     to_string(t.q_right.verdict);
    theta.estimate = t.estimate;
  });

  std::optional<AuxiliaryProfile> prof;
  try {
    AuxOptions ao;
    ao.tol = cfg.tol;
    ao.h = cfg.h;
    ao.h.workers = cfg.workers;
    ao.workers = cfg.workers;
    prof = build_profile(eq, xs, ao);
  } catch (const Error& e) {
    v.errors.push_back(std::string("profile: ") + e.what());
    A.status = B.status = CertStatus::Inconclusive;
    A.evidence = B.evidence = e.what();
  }
  if (prof) {
    guarded(B, [&] {
      auto est = compute_B(*prof, widths, c);
      B.value = est.value;
      B.status = b_diverges(est)               ? CertStatus::Fail
                 : est.trend == Trend::Bounded ? CertStatus::Pass
                                               : CertStatus::Inconclusive;
      if (prof->h_truncated) est.note += std::string(est.note.empty() ? "" : "; ") + "h refinement hit its node budget";
      B.evidence = detail::describe(est);
      B.estimate = est;
    });
    guarded(A, [&] {
      auto est = compute_A(eq, *prof, widths, c);
      std::vector<double> s;
      for (std::size_t i = 0; i < prof->grid.size(); ++i)
        if (!prof->gap[i]) s.push_back(eq.int_q(prof->grid[i] - prof->d[i], prof->grid[i] + prof->d[i]) / (2 * prof->d[i]));
      A.status = detail::positive_status(est, detail::largest_finite(s), cfg.positive_floor);
      A.value = est.value;
      A.evidence = detail::describe(est);
      A.estimate = est;
    });
  }

  if (eq.r_is_one()) {
    guarded(m, [&] {
      auto scan = m_scan(eq, xs, cfg);
      for (std::size_t k = 0; k < scan.scales.size(); ++k)
        m.values.emplace_back("m(" + detail::format_number(scan.scales[k]) + ")", scan.estimates[k].value);
      if (scan.first_pass) {
        m.status = CertStatus::Pass;
        m.value = scan.estimates[*scan.first_pass].value;
        m.estimate = scan.estimates[*scan.first_pass];
        m.evidence = "a = " + detail::format_number(scan.scales[*scan.first_pass]) + ": " + detail::describe(*m.estimate);
      } else {
        bool all_fail = true;
        for (auto s : scan.status) all_fail = all_fail && s == CertStatus::Fail;
        m.status = all_fail ? CertStatus::Fail : CertStatus::Inconclusive;
        m.value = scan.estimates.back().value;
        m.estimate = scan.estimates.back();
        m.evidence = "no scanned a gives m(a) > 0; largest a: " + detail::describe(*m.estimate);
      }
      v.m = std::move(scan);
    });
  } else {
    m.status = CertStatus::NotApplicable;
    m.evidence = "r is not identically 1";
  }

  v.certificates = {q0, theta, A, m, B, nec.q_tails, nec.local_products};
  if (have_nec) v.necessary = nec;
  v.profile = std::move(prof);

  // Assembly.
  const bool standing = nec.inv_r_divergent || nec.local_products.status == CertStatus::Pass;
  const bool q_tails = nec.q_tails.status == CertStatus::Pass;
  const bool sufficient = q0.status == CertStatus::Pass || theta.status == CertStatus::Pass ||
                          (standing && A.status == CertStatus::Pass) ||
                          (standing && m.status == CertStatus::Pass);
  const bool b_inf = B.status == CertStatus::Fail;

  if (nec.q_tails.status == CertStatus::Fail && standing) {
    v.outcome = Outcome::NotSolvable;
    v.reason = "positivity of the q tails fails";
  } else if (nec.inv_r_divergent && nec.local_products.status == CertStatus::Fail) {
    v.outcome = Outcome::NotSolvable;
    v.reason = "the (1/r, q) product stays bounded while 1/r is not integrable at either tail";
  } else if (b_inf) {
    if (sufficient) {
      v.outcome = Outcome::Inconclusive;
      v.reason = "B grows but a sufficient certificate passes; the window is likely too small";
    } else {
      v.outcome = Outcome::NotSolvable;
      v.reason = "B = sup h d grows without bound over the nested windows";
    }
  } else if (q_tails && (sufficient || (standing && B.status == CertStatus::Pass))) {
    v.outcome = Outcome::SolvableAllP;
    for (const auto& cert : v.certificates)
      if (cert.status == CertStatus::Pass && cert.name != "necessary_q_tails" && cert.name != "necessary_local_products") {
        v.reason = "certified by " + cert.name;
        break;
      }
  } else if (!standing && nec.q_tails.status == CertStatus::Fail) {
    v.reason = "q tails vanish, but neither 1/r tails diverge nor the product condition holds";
  } else {
    v.reason = "no certificate decides on these windows";
  }
  return v;
}

}  // namespace slp
