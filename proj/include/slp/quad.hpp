#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <queue>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "slp/error.hpp"
#include "slp/expr.hpp"

namespace slp {

/// A scalar integrand together with the points where it may be non-smooth.
struct Field {
  std::string id;
  std::function<double(double)> f;
  std::vector<double> breakpoints;  // sorted ascending

  double operator()(double x) const { return f(x); }
};

inline Field make_field(std::string id, const Expression& e) {
  return Field{std::move(id), [e](double x) { return e(x); }, e.breakpoints()};
}

inline Field reciprocal_field(std::string id, const Expression& e) {
  return Field{std::move(id), [e](double x) { return 1.0 / e(x); }, e.breakpoints()};
}

inline Field constant_field(std::string id, double c) {
  return Field{std::move(id), [c](double) { return c; }, {}};
}

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Gk15 {
  double result = 0.0;
  double error = 0.0;
  double abs_result = 0.0;
};

inline void check_finite(double v, double x, const std::string& id) {
  if (!std::isfinite(v))
    throw NumericalError("non-finite value of " + id + " at x = " + format_number(x));
}

inline Gk15 gk15(const Field& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  check_finite(fc, center, f.id);
  double res_k = fc * kWgk[7];
  double res_g = fc * kWg[3];
  double res_abs = std::fabs(res_k);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    check_finite(f1, center - dx, f.id);
    check_finite(f2, center + dx, f.id);
    fv1[j] = f1;
    fv2[j] = f2;
    res_k += kWgk[j] * (f1 + f2);
    res_abs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) res_g += kWg[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * res_k;
  double res_asc = kWgk[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j) res_asc += kWgk[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));

  Gk15 out;
  out.result = res_k * half;
  out.abs_result = res_abs * std::fabs(half);
  res_asc *= std::fabs(half);
  double err = std::fabs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (out.abs_result > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * out.abs_result, err);
  out.error = err;
  return out;
}

/// Plain Kronrod sum without error estimate; used for partial panels.
inline double k15(const Field& f, double a, double b) {
  if (a == b) return 0.0;
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = kWgk[7] * f(center);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    s += kWgk[j] * (f(center - dx) + f(center + dx));
  }
  return s * half;
}

/// Splits [a, b] at the breakpoints strictly inside it.
inline std::vector<double> cut_points(const Field& f, double a, double b) {
  std::vector<double> cuts{a};
  auto it = std::upper_bound(f.breakpoints.begin(), f.breakpoints.end(), a);
  for (; it != f.breakpoints.end() && *it < b; ++it) cuts.push_back(*it);
  cuts.push_back(b);
  return cuts;
}

}  // namespace detail

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod quadrature of `field` over [a, b]. Stops
/// once the estimated absolute error is at most tol * (1 + |result|).
/// Breakpoints of the field are always panel boundaries.
inline QuadResult integrate_detailed(const Field& field, double a, double b, double tol,
                                     int max_subdivisions = 4000) {
  if (!(a <= b)) throw ContractViolation("integrate: need a <= b");
  QuadResult out;
  if (a == b) return out;

  struct Item {
    double a, b;
    detail::Gk15 r;
    bool operator<(const Item& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Item> heap;
  double total = 0.0, total_err = 0.0;
  const auto cuts = detail::cut_points(field, a, b);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Item it{cuts[i], cuts[i + 1], detail::gk15(field, cuts[i], cuts[i + 1])};
    total += it.r.result;
    total_err += it.r.error;
    heap.push(it);
  }
  int count = static_cast<int>(heap.size());
  std::vector<Item> frozen;
  while (total_err > tol * (1.0 + std::fabs(total)) && !heap.empty()) {
    if (count >= max_subdivisions)
      throw QuadratureExhausted("integrate(" + field.id + ") on [" + detail::format_number(a) + ", " +
                           detail::format_number(b) + "] exhausted " +
                           std::to_string(max_subdivisions) +
                           " subdivisions; achieved error " + detail::format_number(total_err),
                                total, total_err);
    Item worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      frozen.push_back(worst);  // cannot split further in double precision
      continue;
    }
    Item l{worst.a, mid, detail::gk15(field, worst.a, mid)};
    Item r{mid, worst.b, detail::gk15(field, mid, worst.b)};
    total += l.r.result + r.r.result - worst.r.result;
    total_err += l.r.error + r.r.error - worst.r.error;
    heap.push(l);
    heap.push(r);
    ++count;
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().r.result;
    err += heap.top().r.error;
    heap.pop();
  }
  for (const auto& it : frozen) {
    sum += it.r.result;
    err += it.r.error;
  }
  out.value = sum;
  out.error = err;
  out.intervals = count;
  return out;
}

inline double integrate(const Field& field, double a, double b, double tol) {
  return integrate_detailed(field, a, b, tol).value;
}

/// Antiderivative of a field anchored at `anchor`, extended lazily in
/// geometrically growing chunks as queries reach further out. Each chunk
/// is subdivided locally until every panel meets the relative tolerance.
/// Queries are thread-safe.
class Primitive {
 public:
  explicit Primitive(Field field, double anchor = 0.0, double rel_tol = 1e-13,
                     double lower_limit = -std::numeric_limits<double>::infinity(),
                     double upper_limit = std::numeric_limits<double>::infinity())
      : field_(std::move(field)),
        anchor_(anchor),
        rel_tol_(rel_tol),
        lower_limit_(lower_limit),
        upper_limit_(upper_limit),
        lo_(anchor),
        hi_(anchor) {}

  Primitive(const Primitive&) = delete;
  Primitive& operator=(const Primitive&) = delete;

  const Field& field() const noexcept { return field_; }
  double anchor() const noexcept { return anchor_; }

  /// Integral from the anchor to y.
  double operator()(double y) const {
    ensure(y);
    std::shared_lock lock(mutex_);
    return value_locked(y);
  }

  /// Integral from a to b. Falls back to summing panels directly when the
  /// difference of cumulative values would cancel.
  double between(double a, double b) const {
    if (a == b) return 0.0;
    if (a > b) return -between(b, a);
    ensure(a);
    ensure(b);
    std::shared_lock lock(mutex_);
    const double ca = value_locked(a);
    const double cb = value_locked(b);
    const double d = cb - ca;
    if (std::fabs(d) > 1e-7 * std::max(std::fabs(ca), std::fabs(cb))) return d;
    return explicit_locked(a, b);
  }

  std::size_t panel_count() const {
    std::shared_lock lock(mutex_);
    return panels_.size();
  }

  /// Ensures that [a, b] is covered; useful before parallel sections.
  void reserve(double a, double b) const {
    ensure(a);
    ensure(b);
  }

 private:
  struct Panel {
    double a, b, integral, cum_a;
  };

  void ensure(double y) const {
    {
      std::shared_lock lock(mutex_);
      if (y >= lo_ && y <= hi_) return;
    }
    if (y < lower_limit_ || y > upper_limit_)
      throw NumericalError("primitive of " + field_.id + " queried at " + detail::format_number(y) +
                           " outside its domain [" + detail::format_number(lower_limit_) + ", " +
                           detail::format_number(upper_limit_) + "]");
    if (!std::isfinite(y)) throw NumericalError("primitive of " + field_.id + " queried at non-finite point");
    std::unique_lock lock(mutex_);
    while (y > hi_) extend_right();
    while (y < lo_) extend_left();
  }

  double chunk_span(double edge) const { return std::max(1.0, std::fabs(edge - anchor_)); }

  void extend_right() const {
    const double a = hi_;
    const double b = std::min(upper_limit_, a + chunk_span(a));
    std::vector<Panel> fresh;
    build(a, b, fresh);
    double cum = panels_.empty() ? 0.0 : panels_.back().cum_a + panels_.back().integral;
    for (auto& p : fresh) {
      p.cum_a = cum;
      cum += p.integral;
    }
    panels_.insert(panels_.end(), fresh.begin(), fresh.end());
    hi_ = b;
  }

  void extend_left() const {
    const double b = lo_;
    const double a = std::max(lower_limit_, b - chunk_span(b));
    std::vector<Panel> fresh;
    build(a, b, fresh);
    double cum = panels_.empty() ? 0.0 : panels_.front().cum_a;
    for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) {
      cum -= it->integral;
      it->cum_a = cum;
    }
    panels_.insert(panels_.begin(), fresh.begin(), fresh.end());
    lo_ = a;
  }

  void build(double a, double b, std::vector<Panel>& out) const {
    const auto cuts = detail::cut_points(field_, a, b);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) refine(cuts[i], cuts[i + 1], 0, out);
  }

  void refine(double a, double b, int depth, std::vector<Panel>& out, const detail::Gk15* known = nullptr) const {
    const auto r = known ? *known : detail::gk15(field_, a, b);
    const double mid = 0.5 * (a + b);
    const bool ok = r.error <= rel_tol_ * r.abs_result || r.error <= 1e-300;
    if (ok || depth >= 60 || mid <= a || mid >= b) {
      out.push_back({a, b, r.result, 0.0});
      return;
    }
    const auto lr = detail::gk15(field_, a, mid);
    const auto rr = detail::gk15(field_, mid, b);
    // Halving that no longer shrinks the error means rounding noise in f.
    if (depth >= 10 && lr.error + rr.error > 0.9 * r.error) {
      out.push_back({a, mid, lr.result, 0.0});
      out.push_back({mid, b, rr.result, 0.0});
      return;
    }
    refine(a, mid, depth + 1, out, &lr);
    refine(mid, b, depth + 1, out, &rr);
  }

  std::size_t locate(double y) const {
    auto it = std::upper_bound(panels_.begin(), panels_.end(), y,
                               [](double v, const Panel& p) { return v < p.a; });
    std::size_t i = it == panels_.begin() ? 0 : static_cast<std::size_t>(it - panels_.begin()) - 1;
    return std::min(i, panels_.size() - 1);
  }

  double value_locked(double y) const {
    if (panels_.empty()) return 0.0;
    const Panel& p = panels_[locate(y)];
    if (y == p.a) return p.cum_a;
    if (y == p.b) return p.cum_a + p.integral;
    // Integrate from the nearer panel end.
    if (y - p.a <= p.b - y) return p.cum_a + detail::k15(field_, p.a, y);
    return p.cum_a + p.integral - detail::k15(field_, y, p.b);
  }

  double explicit_locked(double a, double b) const {
    const std::size_t i = locate(a);
    const std::size_t j = locate(b);
    if (i == j) return detail::k15(field_, a, b);
    double s = detail::k15(field_, a, panels_[i].b);
    for (std::size_t k = i + 1; k < j; ++k) s += panels_[k].integral;
    return s + detail::k15(field_, panels_[j].a, b);
  }

  Field field_;
  double anchor_;
  double rel_tol_;
  double lower_limit_, upper_limit_;
  mutable std::shared_mutex mutex_;
  mutable std::vector<Panel> panels_;
  mutable double lo_, hi_;
};

/// values[i] = integral of the field from anchor to grid[i].
struct AntiderivativeTable {
  std::string field_id;
  double anchor = 0.0;
  std::vector<double> grid;
  std::vector<double> values;
};

/// Builds the table by summing per-interval integrals outward from the anchor.
inline AntiderivativeTable cumulative(const Field& field, double anchor, const std::vector<double>& grid,
                                      double tol) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ContractViolation("cumulative: grid must be strictly increasing");
  const auto pos = std::find(grid.begin(), grid.end(), anchor);
  if (pos == grid.end()) throw ContractViolation("cumulative: grid must contain the anchor");
  const auto k = static_cast<std::size_t>(pos - grid.begin());

  AntiderivativeTable t{field.id, anchor, grid, std::vector<double>(grid.size(), 0.0)};
  for (std::size_t i = k + 1; i < grid.size(); ++i)
    t.values[i] = t.values[i - 1] + integrate(field, grid[i - 1], grid[i], tol);
  for (std::size_t i = k; i-- > 0;) t.values[i] = t.values[i + 1] - integrate(field, grid[i], grid[i + 1], tol);
  return t;
}

enum class Side { Left, Right };
enum class TailVerdict { Divergent, Convergent, Undetermined };

inline const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }
inline const char* to_string(TailVerdict v) {
  switch (v) {
    case TailVerdict::Divergent: return "divergent";
    case TailVerdict::Convergent: return "convergent";
    default: return "undetermined";
  }
}

/// Numerical verdict on an improper integral over one tail.
struct TailClass {
  Side side = Side::Right;
  TailVerdict verdict = TailVerdict::Undetermined;
  double value = 0.0;  // meaningful for Convergent
  bool declared = false;
  TailVerdict numerical = TailVerdict::Undetermined;
  double start = 0.0;
  std::vector<std::pair<double, double>> evidence;  // (cutoff distance, partial integral)
  std::string note;
};

/// Classifies the tail integral of a field beyond `start` by integrating over
/// geometric cutoffs start +- 2^k.
///
/// A doubling is a plateau when the partial integral changes by at most
/// tol relative. Two consecutive plateaus give Convergent. Four consecutive
/// non-plateau doublings whose increments do not shrink below 3/4 of the
/// previous increment give Divergent. Anything else up to max_cutoff is
/// Undetermined. A declaration overrides the verdict; evidence is kept.
inline TailClass classify_tail(const Field& field, Side side, double tol, double max_cutoff,
                               double start = 0.0, std::optional<TailVerdict> declaration = std::nullopt) {
  TailClass tc;
  tc.side = side;
  tc.start = start;
  const double sign = side == Side::Right ? 1.0 : -1.0;
  double partial = 0.0;
  double prev_increment = 0.0;
  int plateaus = 0, growing = 0;
  double prev_cut = 0.0;
  const double quad_tol = std::max(1e-14, 0.01 * tol);
  try {
    for (double cut = 1.0; cut <= max_cutoff; cut *= 2.0) {
      const double a = start + sign * prev_cut;
      const double b = start + sign * cut;
      double inc = 0.0;
      try {
        inc = integrate(field, std::min(a, b), std::max(a, b), quad_tol);
      } catch (const QuadratureExhausted& e) {
        // Unresolved oscillation: a rough increment still shows growth.
        if (!(e.error() < std::fabs(e.value()))) throw;
        inc = e.value();
        if (tc.note.empty()) tc.note = "low-accuracy increments beyond cutoff " + detail::format_number(prev_cut);
      }
      partial += inc;
      tc.evidence.emplace_back(cut, partial);
      const bool plateau = inc == 0.0 || std::fabs(inc) <= tol * std::fabs(partial);
      if (plateau) {
        ++plateaus;
        growing = 0;
      } else {
        plateaus = 0;
        if (inc > 0.0 && prev_increment > 0.0 && inc >= 0.75 * prev_increment)
          ++growing;
        else
          growing = 0;
      }
      prev_increment = inc;
      prev_cut = cut;
      if (plateaus >= 2) {
        tc.numerical = TailVerdict::Convergent;
        tc.value = partial;
        break;
      }
      if (growing >= 4) {
        tc.numerical = TailVerdict::Divergent;
        break;
      }
    }
  } catch (const Error& e) {
    tc.note = e.what();
  }
  if (tc.numerical == TailVerdict::Undetermined && !tc.evidence.empty()) tc.value = tc.evidence.back().second;
  tc.verdict = tc.numerical;
  if (declaration) {
    tc.declared = true;
    tc.verdict = *declaration;
  }
  return tc;
}

}  // namespace slp
