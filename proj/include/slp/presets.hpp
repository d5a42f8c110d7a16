#pragma once

#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "slp/coefficients.hpp"

namespace slp {

struct PresetInfo {
  const char* name;
  const char* parameter;  // nullptr when the preset takes none
  double default_value;
  const char* note;
};

inline const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> list = {
      {"constant", "lambda", 1.0, "r = 1, q = lambda^2"},
      {"example-4.4", "alpha", 0.5, "r = 1 on [-1,1] and x^2 outside, q = 1 + cos|x|^alpha"},
      {"example-4.5", "alpha", 1.0, "r = 1, q = 1 + cos|x|^alpha; solvable iff alpha >= 1"},
      {"example-4.7", nullptr, 0.0,
       "r = 1 on [-1,1] and x^2 outside, q = 1 on [-1,1] and |x|^(-1/2) outside; theta is finite, so the "
       "equation is solvable (the original write-up of this example says otherwise in one sentence)"},
      {"gaussian-q", nullptr, 0.0, "r = 1, q = exp(-x^2); q vanishes at both ends, not solvable"},
      {"half-line-zero", nullptr, 0.0, "r = 1, q = 1 for x <= 0 and 0 for x > 0; the right tail of q vanishes"},
  };
  return list;
}

/// Builds a named coefficient pair. `param` is lambda or alpha.
inline CoefficientPair preset(std::string_view name, double param) {
  const std::string lit = detail::format_number(param);
  if (name == "constant") return CoefficientPair::parse("1", detail::format_number(param * param));
  if (name == "example-4.4")
    return CoefficientPair::parse("piecewise(abs(x) <= 1: 1, else: x^2)", "1 + cos(abs(x)^" + lit + ")");
  if (name == "example-4.5") return CoefficientPair::parse("1", "1 + cos(abs(x)^" + lit + ")");
  if (name == "example-4.7")
    return CoefficientPair::parse("piecewise(abs(x) <= 1: 1, else: x^2)",
                                  "piecewise(abs(x) <= 1: 1, else: 1/sqrt(abs(x)))");
  if (name == "gaussian-q") return CoefficientPair::parse("1", "exp(-x^2)");
  if (name == "half-line-zero") return CoefficientPair::parse("1", "piecewise(x <= 0: 1, else: 0)");
  throw ContractViolation("unknown preset '" + std::string(name) + "'");
}

inline CoefficientPair preset(std::string_view name) {
  for (const auto& p : preset_catalog())
    if (name == p.name) return preset(name, p.default_value);
  throw ContractViolation("unknown preset '" + std::string(name) + "'");
}

/// Accepts "name" or "name(value)".
inline CoefficientPair preset_from_spec(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos) return preset(spec);
  if (spec.back() != ')') throw ContractViolation("bad preset spec '" + spec + "'");
  const std::string name = spec.substr(0, open);
  const std::string arg = spec.substr(open + 1, spec.size() - open - 2);
  const auto value = parse_expression(arg).constant_value();
  if (!value) throw ContractViolation("preset parameter must be a constant: '" + arg + "'");
  for (const auto& p : preset_catalog())
    if (name == p.name && !p.parameter) throw ContractViolation("preset '" + name + "' takes no parameter");
  return preset(name, *value);
}

}  // namespace slp
