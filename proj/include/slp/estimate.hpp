#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace slp {

enum class Trend { Bounded, Growing, Decaying, BoundedBelow, Undetermined };

inline const char* to_string(Trend t) {
  switch (t) {
    case Trend::Bounded: return "bounded";
    case Trend::Growing: return "growing";
    case Trend::Decaying: return "decaying";
    case Trend::BoundedBelow: return "bounded_below";
    default: return "undetermined";
  }
}

/// Sup (or inf) of a functional over nested windows. evidence holds
/// (window half-width, value on that window) in increasing window order.
struct BoundEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();  // on the largest window
  double arg_x = std::numeric_limits<double>::quiet_NaN();
  double a = 0.0, b = 0.0;
  Trend trend = Trend::Undetermined;
  std::vector<std::pair<double, double>> evidence;
  std::size_t gaps = 0;
  std::size_t samples = 0;
  bool infimum = false;
  std::string grade = "extrapolated";  // or "certified-on-window"
  std::string note;
};

namespace detail {

inline constexpr double kTrendGrowth = 0.10;

/// Relative step from one window to the next; +inf when the previous value is 0.
inline double relative_step(double prev, double cur) {
  if (prev == cur) return 0.0;
  if (prev == 0.0) return cur > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  return (cur - prev) / std::fabs(prev);
}

}  // namespace detail

/// growing: each of the last three doublings raises the sup by more than 10%.
/// bounded: each of the last two raises it by at most 10%.
inline Trend classify_sup_trend(const std::vector<std::pair<double, double>>& ev) {
  const std::size_t n = ev.size();
  for (const auto& e : ev)
    if (!std::isfinite(e.second)) return n && std::isinf(ev.back().second) ? Trend::Growing : Trend::Undetermined;
  if (n >= 4) {
    bool grow = true;
    for (std::size_t i = n - 3; i < n; ++i)
      if (!(detail::relative_step(ev[i - 1].second, ev[i].second) > detail::kTrendGrowth)) grow = false;
    if (grow) return Trend::Growing;
  }
  if (n >= 3) {
    bool flat = true;
    for (std::size_t i = n - 2; i < n; ++i)
      if (!(detail::relative_step(ev[i - 1].second, ev[i].second) <= detail::kTrendGrowth)) flat = false;
    if (flat) return Trend::Bounded;
  }
  return Trend::Undetermined;
}

/// decaying: each of the last three doublings lowers the inf by more than 10%.
/// bounded_below: each of the last two lowers it by at most 10%.
inline Trend classify_inf_trend(const std::vector<std::pair<double, double>>& ev) {
  const std::size_t n = ev.size();
  for (const auto& e : ev)
    if (!std::isfinite(e.second)) return Trend::Undetermined;
  if (n && ev.back().second <= 0.0) return Trend::Decaying;
  if (n >= 4) {
    bool decay = true;
    for (std::size_t i = n - 3; i < n; ++i)
      if (!(-detail::relative_step(ev[i - 1].second, ev[i].second) > detail::kTrendGrowth)) decay = false;
    if (decay) return Trend::Decaying;
  }
  if (n >= 3) {
    bool flat = true;
    for (std::size_t i = n - 2; i < n; ++i)
      if (!(-detail::relative_step(ev[i - 1].second, ev[i].second) <= detail::kTrendGrowth)) flat = false;
    if (flat) return Trend::BoundedBelow;
  }
  return Trend::Undetermined;
}

/// Sup of values over nested symmetric windows [c - w, c + w] with the
/// window half-widths given in increasing order. Non-finite samples and
/// samples flagged in `bad` count as gaps.
inline BoundEstimate nested_extremum(const std::vector<double>& xs, const std::vector<double>& values,
                                     const std::vector<double>& half_widths, double center, bool infimum,
                                     const std::vector<bool>* bad = nullptr) {
  BoundEstimate est;
  est.infimum = infimum;
  for (double w : half_widths) {
    double best = infimum ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    double arg = std::numeric_limits<double>::quiet_NaN();
    std::size_t gaps = 0, count = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] < center - w || xs[i] > center + w) continue;
      ++count;
      if ((bad && (*bad)[i]) || std::isnan(values[i])) {
        ++gaps;
        continue;
      }
      const double v = values[i];
      if (infimum ? v < best : v > best) {
        best = v;
        arg = xs[i];
      }
    }
    if (count == gaps) best = std::numeric_limits<double>::quiet_NaN();
    est.evidence.emplace_back(w, best);
    est.value = best;
    est.arg_x = arg;
    est.gaps = gaps;
    est.samples = count;
    est.a = center - w;
    est.b = center + w;
  }
  est.trend = infimum ? classify_inf_trend(est.evidence) : classify_sup_trend(est.evidence);
  if (est.samples && 20 * est.gaps > est.samples) {
    est.trend = Trend::Undetermined;
    est.note = "more than 5% of samples are gaps";
  }
  return est;
}

}  // namespace slp
