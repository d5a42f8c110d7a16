#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slp/expr.hpp"
#include "slp/grid.hpp"
#include "slp/quad.hpp"

namespace slp {

/// User assertion about one tail of 1/r and q.
struct TailDeclaration {
  std::optional<TailVerdict> inv_r;
  std::optional<TailVerdict> q;
};

/// The coefficients r, q of -(r y')' + q y = f.
struct CoefficientPair {
  Expression r;
  Expression q;
  TailDeclaration left;
  TailDeclaration right;

  static CoefficientPair parse(std::string_view r_text, std::string_view q_text) {
    return CoefficientPair{parse_expression(r_text), parse_expression(q_text), {}, {}};
  }
};

/// A coefficient pair with shared antiderivatives of 1/r and q.
/// Antiderivatives are anchored at 0 and extend lazily.
class Equation {
 public:
  explicit Equation(CoefficientPair pair, double rel_tol = 1e-13)
      : pair_(std::move(pair)),
        inv_r_field_(reciprocal_field("1/r", pair_.r)),
        q_field_(make_field("q", pair_.q)),
        inv_r_(std::make_unique<Primitive>(inv_r_field_, 0.0, rel_tol)),
        q_int_(std::make_unique<Primitive>(q_field_, 0.0, rel_tol)) {
    const auto rc = pair_.r.constant_value();
    r_is_one_ = rc && *rc == 1.0;
    breakpoints_ = merge_breaks(inv_r_field_.breakpoints, q_field_.breakpoints);
  }

  const CoefficientPair& pair() const noexcept { return pair_; }
  double r(double x) const { return pair_.r(x); }
  double q(double x) const { return pair_.q(x); }
  bool r_is_one() const noexcept { return r_is_one_; }

  const Field& inv_r_field() const noexcept { return inv_r_field_; }
  const Field& q_field() const noexcept { return q_field_; }

  /// Integral of 1/r over [a, b].
  double int_inv_r(double a, double b) const { return inv_r_->between(a, b); }
  /// Integral of q over [a, b].
  double int_q(double a, double b) const { return q_int_->between(a, b); }

  const Primitive& inv_r_primitive() const noexcept { return *inv_r_; }
  const Primitive& q_primitive() const noexcept { return *q_int_; }

  /// Union of the breakpoints of r and q.
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

 private:
  static std::vector<double> merge_breaks(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  }

  CoefficientPair pair_;
  Field inv_r_field_;
  Field q_field_;
  std::unique_ptr<Primitive> inv_r_;
  std::unique_ptr<Primitive> q_int_;
  std::vector<double> breakpoints_;
  bool r_is_one_ = false;
};

struct Violation {
  enum class Kind { RNonPositive, QNegative, RNonFinite, QNonFinite, NotLocallyIntegrable };
  Kind kind;
  double x;
  double value;
  std::string detail;
};

inline const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::RNonPositive: return "r_nonpositive";
    case Violation::Kind::QNegative: return "q_negative";
    case Violation::Kind::RNonFinite: return "r_nonfinite";
    case Violation::Kind::QNonFinite: return "q_nonfinite";
    default: return "not_locally_integrable";
  }
}

struct ValidationReport {
  double a = 0.0, b = 0.0;
  std::size_t samples = 0;
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Samples r > 0 and q >= 0 on a uniform grid plus the breakpoints, and
/// checks that 1/r and q integrate over [a, b].
inline ValidationReport validate_coefficients(const CoefficientPair& pair, double a, double b,
                                              std::size_t n_samples) {
  if (!(a < b) || n_samples < 2) throw ContractViolation("validate_coefficients: need a < b and n >= 2");
  ValidationReport rep;
  rep.a = a;
  rep.b = b;
  auto xs = uniform_grid(a, b, n_samples);
  auto bp = pair.r.breakpoints();
  auto bq = pair.q.breakpoints();
  for (double x : bp) if (x >= a && x <= b) xs.push_back(x);
  for (double x : bq) if (x >= a && x <= b) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  rep.samples = xs.size();

  using K = Violation::Kind;
  for (double x : xs) {
    try {
      const double r = pair.r(x);
      if (!std::isfinite(r))
        rep.violations.push_back({K::RNonFinite, x, r, {}});
      else if (!(r > 0.0))
        rep.violations.push_back({K::RNonPositive, x, r, {}});
    } catch (const DomainError& e) {
      rep.violations.push_back({K::RNonFinite, x, std::nan(""), e.what()});
    }
    try {
      const double q = pair.q(x);
      if (!std::isfinite(q))
        rep.violations.push_back({K::QNonFinite, x, q, {}});
      else if (q < 0.0)
        rep.violations.push_back({K::QNegative, x, q, {}});
    } catch (const DomainError& e) {
      rep.violations.push_back({K::QNonFinite, x, std::nan(""), e.what()});
    }
  }
  if (rep.ok()) {
    const Field inv_r = reciprocal_field("1/r", pair.r);
    const Field q = make_field("q", pair.q);
    // Cell by cell; a finite result that merely misses the accuracy target
    // (fast oscillation) still counts as integrable.
    for (const Field* f : {&inv_r, &q}) {
      for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        try {
          integrate_detailed(*f, xs[i], xs[i + 1], 1e-8, 400);
        } catch (const QuadratureExhausted& e) {
          if (std::isfinite(e.value()) && std::isfinite(e.error())) continue;
          rep.violations.push_back({K::NotLocallyIntegrable, xs[i], std::nan(""), e.what()});
          break;
        } catch (const Error& e) {
          rep.violations.push_back({K::NotLocallyIntegrable, xs[i], std::nan(""), e.what()});
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace slp
