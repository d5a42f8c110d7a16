#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slp/aux.hpp"
#include "slp/criteria.hpp"
#include "slp/fss.hpp"
#include "slp/green.hpp"

namespace slp {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.3.0";

namespace report {

/// Finite numbers stay numbers; inf and nan become strings.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "NaN";
  return v > 0 ? "Infinity" : "-Infinity";
}

/// Writes JSON with every float at 17 significant digits.
inline void write_json(std::ostream& os, const json& j, int indent = 2, int depth = 0) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Short numeric arrays (pairs, windows) stay on one line.
      bool flat = j.size() <= 4;
      for (const auto& e : j) flat = flat && e.is_primitive();
      os << (flat ? "[" : "[\n");
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << (flat ? ", " : ",\n");
        if (!flat) os << pad;
        write_json(os, j[i], indent, depth + 1);
      }
      if (flat)
        os << "]";
      else
        os << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
      std::string s = buf;
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      os << s;
      return;
    }
    default:
      os << j.dump();
  }
}

inline std::string to_text(const json& j) {
  std::ostringstream os;
  write_json(os, j);
  os << "\n";
  return os.str();
}

inline std::string utc_timestamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- CSV

class Csv {
 public:
  Csv(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  Csv& operator<<(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    sep();
    out_ << buf;
    return *this;
  }
  Csv& operator<<(long long v) {
    sep();
    out_ << v;
    return *this;
  }
  void end_row() {
    out_ << "\n";
    first_ = true;
    ++rows_;
  }
  std::size_t rows() const { return rows_; }

 private:
  void sep() {
    if (!first_) out_ << ",";
    first_ = false;
  }
  std::ofstream out_;
  bool first_ = true;
  std::size_t rows_ = 0;
};

inline json artifact(const std::string& kind, const std::string& file, std::size_t rows) {
  return json{{"kind", kind}, {"path", file}, {"rows", rows}};
}

inline json write_profile_csv(const AuxiliaryProfile& p, const std::string& dir, const std::string& file = "profile.csv") {
  Csv c(dir + "/" + file, {"x", "d1", "d2", "phi", "psi", "h", "d", "hd", "d_tilde", "identity", "gap"});
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    c << p.grid[i] << p.d1[i] << p.d2[i] << p.phi[i] << p.psi[i] << p.h[i] << p.d[i] << p.hd[i] << p.d_tilde[i]
      << p.identity[i] << static_cast<long long>(p.gap[i]);
    c.end_row();
  }
  return artifact("profile", file, c.rows());
}

inline json write_covering_csv(const Covering& cov, const std::string& dir, const std::string& file = "covering.csv") {
  Csv c(dir + "/" + file, {"n", "lo", "x", "hi", "rh_from_base"});
  for (const auto& s : cov.segments) {
    c << static_cast<long long>(s.n) << s.lo << s.x << s.hi << s.rh_from_base;
    c.end_row();
  }
  return artifact("covering", file, c.rows());
}

inline json write_fss_csv(const FssTable& t, const std::string& dir, const std::string& file = "fss.csv") {
  Csv c(dir + "/" + file, {"x", "log_v", "log_u", "rho", "wronskian_residual", "s", "sigma", "phase"});
  for (std::size_t i = 0; i < t.size(); ++i) {
    c << t.grid[i] << t.log_v[i] << t.log_u[i] << std::exp(t.log_rho[i]) << t.wronskian_residual[i] << t.s[i]
      << t.sigma[i] << t.phase[i];
    c.end_row();
  }
  return artifact("fss", file, c.rows());
}

inline json write_green_csv(const GreenSolution& g, const std::string& dir, const std::string& file = "green.csv") {
  Csv c(dir + "/" + file, {"x", "y"});
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    c << g.grid[i] << g.y[i];
    c.end_row();
  }
  return artifact("green", file, c.rows());
}

inline json write_hardy_csv(const HardyReport& h, const std::string& dir, const std::string& file = "hardy.csv") {
  Csv c(dir + "/" + file, {"x", "phi1", "phi2", "phi1_rho_form", "phi2_rho_form"});
  for (std::size_t i = 0; i < h.grid.size(); ++i) {
    c << h.grid[i] << h.phi1_values[i] << h.phi2_values[i] << h.phi1_rho_form[i] << h.phi2_rho_form[i];
    c.end_row();
  }
  return artifact("hardy", file, c.rows());
}

/// Antiderivative table; the header names the field and the anchor.
inline json write_primitive_csv(const Primitive& prim, const std::string& field, const std::vector<double>& grid,
                                const std::string& dir, const std::string& file) {
  Csv c(dir + "/" + file, {"x", "int[" + field + ";anchor=" + detail::format_number(prim.anchor()) + "]"});
  for (double x : grid) {
    c << x << prim(x);
    c.end_row();
  }
  return artifact("primitive", file, c.rows());
}

// ---- JSON sections

inline json to_json(const BoundEstimate& e) {
  json ev = json::array();
  for (const auto& [w, v] : e.evidence) ev.push_back(json::array({num(w), num(v)}));
  return json{{"value", num(e.value)},   {"arg_x", num(e.arg_x)},       {"window", json::array({num(e.a), num(e.b)})},
              {"kind", e.infimum ? "inf" : "sup"}, {"trend", to_string(e.trend)}, {"grade", e.grade},
              {"samples", e.samples},    {"gaps", e.gaps},              {"evidence", ev},
              {"note", e.note}};
}

inline json to_json(const TailClass& t) {
  json ev = json::array();
  for (const auto& [c, v] : t.evidence) ev.push_back(json::array({num(c), num(v)}));
  return json{{"side", to_string(t.side)},           {"verdict", to_string(t.verdict)},
              {"numerical", to_string(t.numerical)}, {"declared", t.declared},
              {"start", num(t.start)},               {"value", num(t.value)},
              {"evidence", ev},                      {"note", t.note}};
}

inline json to_json(const Certificate& c) {
  json values = json::object();
  for (const auto& [k, v] : c.values) values[k] = num(v);
  return json{{"name", c.name},
              {"status", to_string(c.status)},
              {"value", num(c.value)},
              {"values", values},
              {"estimate", c.estimate ? to_json(*c.estimate) : json(nullptr)},
              {"evidence", c.evidence}};
}

inline json to_json(const ValidationReport& v) {
  json viol = json::array();
  for (const auto& x : v.violations)
    viol.push_back(json{{"kind", to_string(x.kind)}, {"x", num(x.x)}, {"value", num(x.value)}, {"detail", x.detail}});
  return json{{"ok", v.ok()}, {"window", json::array({num(v.a), num(v.b)})}, {"samples", v.samples}, {"violations", viol}};
}

inline json to_json(const NecessaryReport& n) {
  return json{{"inv_r_left", to_json(n.inv_r_left)},
              {"inv_r_right", to_json(n.inv_r_right)},
              {"inv_r_divergent", n.inv_r_divergent},
              {"q_tails", to_json(n.q_tails)},
              {"local_products", to_json(n.local_products)}};
}

inline json to_json(const InequalityReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(json{{"name", c.name},
                          {"evaluated", c.evaluated},
                          {"band", json::array({num(c.lower), num(c.upper)})},
                          {"points", c.points},
                          {"passed", c.passed},
                          {"fraction", num(c.fraction)},
                          {"worst_margin", num(c.points ? c.worst_margin : NAN)},
                          {"worst_x", num(c.worst_x)}});
  return json{{"checks", checks}, {"skipped", r.skipped}};
}

inline json to_json(const HardyReport& h) {
  return json{{"p", num(h.p)},
              {"p_prime", num(h.p_prime)},
              {"H_p", num(std::max(h.phi1.value, h.phi2.value))},
              {"phi1", to_json(h.phi1)},
              {"phi2", to_json(h.phi2)},
              {"norm_lower", num(h.lower)},
              {"norm_upper", num(h.upper)},
              {"two_form_max_rel_diff", num(h.two_form_max_rel_diff)},
              {"tail_rel", num(h.tail_rel)}};
}

inline json verdict_json(const Verdict& v) {
  json errors = json::array();
  for (const auto& e : v.errors) errors.push_back(e);
  return json{{"outcome", to_string(v.outcome)}, {"reason", v.reason}, {"dichotomy_note", v.dichotomy_note},
              {"errors", errors}};
}

/// Skeleton with the six top-level sections.
inline json skeleton(json meta) {
  return json{{"meta", std::move(meta)},      {"validation", nullptr}, {"necessary", nullptr},
              {"certificates", json::array()}, {"verdict", nullptr},    {"artifacts", json::array()}};
}

}  // namespace report
}  // namespace slp
