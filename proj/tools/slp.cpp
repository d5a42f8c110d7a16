// slp: correct-solvability analysis of -(r y')' + q y = f in L_p(R).
//
//   slp analyze --preset "example-4.5(2)" --window -300 300 --out run1
//   slp hardy --preset constant --p 2
//
// Exit status: 0 on any completed run (including NotSolvable), 2 on
// configuration or parse errors, 3 on numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slp/criteria.hpp"
#include "slp/fss.hpp"
#include "slp/green.hpp"
#include "slp/presets.hpp"
#include "slp/report.hpp"

namespace {

using slp::json;
namespace report = slp::report;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string command;
  std::string r_text, q_text, preset;
  std::vector<double> window;
  std::size_t grid = 0;
  std::size_t doublings = 4;
  double tol = 1e-10;
  std::size_t workers = 1;
  std::string out;
  std::vector<std::string> declarations;
  double p = 2.0;
  double base = 0.0;
  std::string f_text = "exp(-x^2)";

  double a() const { return window.at(0); }
  double b() const { return window.at(1); }
};

/// An error that maps to exit status 2.
struct ConfigError : slp::Error {
  using slp::Error::Error;
};

// ---- input

void apply_declaration(slp::CoefficientPair& pair, const std::string& text) {
  // side.field=verdict, e.g. right.q=divergent
  const auto dot = text.find('.');
  const auto eq = text.find('=');
  if (dot == std::string::npos || eq == std::string::npos || eq < dot)
    throw ConfigError("bad tail declaration '" + text + "' (expected side.field=verdict)");
  const std::string side = text.substr(0, dot), field = text.substr(dot + 1, eq - dot - 1), what = text.substr(eq + 1);
  slp::TailVerdict v;
  if (what == "divergent")
    v = slp::TailVerdict::Divergent;
  else if (what == "convergent")
    v = slp::TailVerdict::Convergent;
  else
    throw ConfigError("tail verdict must be divergent or convergent, got '" + what + "'");
  slp::TailDeclaration* d = side == "left" ? &pair.left : side == "right" ? &pair.right : nullptr;
  if (!d) throw ConfigError("tail side must be left or right, got '" + side + "'");
  if (field == "q")
    d->q = v;
  else if (field == "inv_r" || field == "1/r")
    d->inv_r = v;
  else
    throw ConfigError("tail field must be q or inv_r, got '" + field + "'");
}

slp::Expression parse_or_report(const std::string& label, const std::string& text) {
  try {
    return slp::parse_expression(text);
  } catch (const slp::ParseError& e) {
    std::string msg = label + ": " + e.what() + "\n  " + text + "\n  " +
                      std::string(static_cast<std::size_t>(std::max(0, e.column() - 1)), ' ') + "^";
    throw ConfigError(msg);
  }
}

slp::CoefficientPair coefficients(const RunConfig& c) {
  slp::CoefficientPair pair;
  if (!c.preset.empty()) {
    try {
      pair = slp::preset_from_spec(c.preset);
    } catch (const slp::Error& e) {
      throw ConfigError(e.what());
    }
  } else if (c.r_text.empty() || c.q_text.empty()) {
    throw ConfigError("give --preset, or both --r and --q");
  }
  if (!c.r_text.empty()) pair.r = parse_or_report("r", c.r_text);
  if (!c.q_text.empty()) pair.q = parse_or_report("q", c.q_text);
  for (const auto& d : c.declarations) apply_declaration(pair, d);
  return pair;
}

void check_window(const RunConfig& c) {
  if (c.window.size() != 2 || !(c.a() < c.b()) || !std::isfinite(c.a()) || !std::isfinite(c.b()))
    throw ConfigError("window must be two finite numbers A < B");
  if (c.grid < 64) throw ConfigError("grid must have at least 64 points");
  if (!(c.tol > 0.0) || c.tol > 1e-2) throw ConfigError("tol must lie in (0, 1e-2]");
}

json meta(const RunConfig& c, const slp::CoefficientPair* pair) {
  json decl = json::array();
  for (const auto& d : c.declarations) decl.push_back(d);
  json cfg{{"preset", c.preset},
           {"r", pair ? pair->r.format() : c.r_text},
           {"q", pair ? pair->q.format() : c.q_text},
           {"window", c.window.size() == 2 ? json::array({report::num(c.a()), report::num(c.b())}) : json(nullptr)},
           {"grid", c.grid},
           {"tol", report::num(c.tol)},
           {"workers", c.workers},
           {"declarations", decl}};
  if (c.command == "analyze") cfg["nested_doublings"] = c.doublings;
  if (c.command == "green" || c.command == "hardy") cfg["p"] = report::num(c.p);
  if (c.command == "green") cfg["f"] = c.f_text;
  if (c.command == "covering") cfg["base"] = report::num(c.base);
  return json{{"tool", "slp"}, {"version", slp::kVersion}, {"command", c.command},
              {"timestamp", report::utc_timestamp()}, {"config", cfg}};
}

std::string out_dir(const RunConfig& c) {
  if (c.out.empty()) return {};
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + c.out + ": " + ec.message());
  return c.out;
}

slp::ValidationReport validate_or_throw(const slp::CoefficientPair& pair, const RunConfig& c, json& rep) {
  auto v = slp::validate_coefficients(pair, c.a(), c.b(), c.grid);
  rep["validation"] = report::to_json(v);
  if (!v.ok()) {
    const auto& first = v.violations.front();
    throw ConfigError(std::string("coefficients fail the hypotheses: ") + slp::to_string(first.kind) + " at x = " +
                      slp::detail::format_number(first.x));
  }
  return v;
}

// ---- commands

/// Human summary; stderr when the report itself goes to stdout.
std::ostream& say(const RunConfig& c) { return c.out.empty() ? std::cerr : std::cout; }

void run_analyze(const RunConfig& c, const slp::CoefficientPair& pair, json& rep) {
  slp::CriteriaConfig cfg;
  cfg.a = c.a();
  cfg.b = c.b();
  cfg.doublings = c.doublings;
  cfg.grid_points = c.grid;
  cfg.tol = c.tol;
  cfg.workers = c.workers;
  try {
    cfg.validate();
  } catch (const slp::ContractViolation& e) {
    throw ConfigError(e.what());
  }
  const auto v = slp::decide(pair, cfg);
  rep["validation"] = report::to_json(v.validation);
  if (v.necessary) rep["necessary"] = report::to_json(*v.necessary);
  for (const auto& cert : v.certificates) rep["certificates"].push_back(report::to_json(cert));
  rep["verdict"] = report::verdict_json(v);
  if (v.profile) {
    json aux{{"points", v.profile->grid.size()},
             {"gaps", v.profile->gaps},
             {"h_domain", json::array({report::num(v.profile->h_lo), report::num(v.profile->h_hi)})},
             {"h_nodes", v.profile->h_nodes},
             {"h_truncated", v.profile->h_truncated}};
    rep["module"] = json{{"aux", aux}};
  }
  const auto dir = out_dir(c);
  if (!dir.empty() && v.profile) {
    rep["artifacts"].push_back(report::write_profile_csv(*v.profile, dir));
    const slp::Equation eq(pair);
    rep["artifacts"].push_back(
        report::write_primitive_csv(eq.inv_r_primitive(), "1/r", v.profile->grid, dir, "primitive_inv_r.csv"));
    rep["artifacts"].push_back(
        report::write_primitive_csv(eq.q_primitive(), "q", v.profile->grid, dir, "primitive_q.csv"));
  }
  say(c) << "verdict: " << slp::to_string(v.outcome) << "\n";
  if (!v.reason.empty()) say(c) << "  " << v.reason << "\n";
  for (const auto& cert : v.certificates)
    say(c) << "  " << cert.name << ": " << slp::to_string(cert.status) << "  "
              << slp::detail::format_number(cert.value) << "\n";
}

slp::AuxOptions aux_options(const RunConfig& c) {
  slp::AuxOptions ao;
  ao.tol = c.tol;
  ao.workers = c.workers;
  ao.h.workers = c.workers;
  return ao;
}

void run_aux(const RunConfig& c, const slp::CoefficientPair& pair, json& rep) {
  validate_or_throw(pair, c, rep);
  const slp::Equation eq(pair);
  const auto prof = slp::build_profile(eq, slp::merge_points(slp::uniform_grid(c.a(), c.b(), c.grid), eq.breakpoints()),
                                       aux_options(c));
  double hd_max = 0.0, id_max = 0.0;
  for (std::size_t i = 0; i < prof.grid.size(); ++i) {
    if (prof.gap[i]) continue;
    hd_max = std::max(hd_max, prof.hd[i]);
    id_max = std::max(id_max, std::fabs(prof.identity[i]));
  }
  json notes = json::array();
  for (const auto& n : prof.notes) notes.push_back(n);
  rep["module"] = json{{"aux",
                        {{"points", prof.grid.size()},
                         {"gaps", prof.gaps},
                         {"gap_notes", notes},
                         {"hd_max", report::num(hd_max)},
                         {"identity_max_abs", report::num(id_max)},
                         {"h_domain", json::array({report::num(prof.h_lo), report::num(prof.h_hi)})},
                         {"h_nodes", prof.h_nodes},
                         {"h_truncated", prof.h_truncated}}}};
  const auto dir = out_dir(c);
  if (!dir.empty()) rep["artifacts"].push_back(report::write_profile_csv(prof, dir));
  say(c) << "profile: " << prof.grid.size() << " points, " << prof.gaps << " gaps, max hd "
            << slp::detail::format_number(hd_max) << "\n";
}

slp::FssTable fss_for(const slp::Equation& eq, const RunConfig& c) {
  return slp::build_fss(eq, slp::uniform_grid(c.a(), c.b(), c.grid));
}

void run_fss(const RunConfig& c, const slp::CoefficientPair& pair, json& rep) {
  validate_or_throw(pair, c, rep);
  const slp::Equation eq(pair);
  const auto t = fss_for(eq, c);
  double w_max = 0.0;
  for (std::size_t i = t.i_lo; i <= t.i_hi; ++i) w_max = std::max(w_max, std::fabs(t.wronskian_residual[i]));

  // Two-sided bounds against the auxiliary functions on a coarser grid.
  const std::size_t n = std::min<std::size_t>(c.grid, 401);
  const auto prof = slp::build_profile(eq, slp::uniform_grid(t.lo_trim(), t.hi_trim(), n), aux_options(c));
  const auto ineq = slp::check_otelbaev(prof, t, eq.r_is_one());

  rep["module"] = json{{"fss",
                        {{"points", t.size()},
                         {"trimmed", json::array({report::num(t.lo_trim()), report::num(t.hi_trim())})},
                         {"x_ref", report::num(t.x_ref)},
                         {"x0", t.x0 ? report::num(*t.x0) : json(nullptr)},
                         {"preroll", {{"left", report::num(t.preroll_left)},
                                      {"right", report::num(t.preroll_right)},
                                      {"left_converged", t.preroll_left_converged},
                                      {"right_converged", t.preroll_right_converged}}},
                         {"wronskian_residual_max", report::num(w_max)},
                         {"inequalities", report::to_json(ineq)}}}};
  const auto dir = out_dir(c);
  if (!dir.empty()) rep["artifacts"].push_back(report::write_fss_csv(t, dir));
  say(c) << "fss: " << t.size() << " points, max Wronskian residual " << slp::detail::format_number(w_max) << "\n";
  for (const auto& ch : ineq.checks)
    if (ch.evaluated)
      say(c) << "  " << ch.name << ": " << ch.passed << "/" << ch.points << " within ["
                << slp::detail::format_number(ch.lower) << ", " << slp::detail::format_number(ch.upper) << "]\n";
}

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p must satisfy 1 < p < inf");
}

void run_green(const RunConfig& c, const slp::CoefficientPair& pair, json& rep) {
  check_p(c.p);
  validate_or_throw(pair, c, rep);
  const slp::Equation eq(pair);
  const auto fexpr = parse_or_report("f", c.f_text);
  const slp::Field f = slp::make_field("f", fexpr);
  const auto t = fss_for(eq, c);
  auto sol = slp::apply_green(t, f);
  const double res = slp::ode_residual(eq, sol, f);
  const auto ratio = slp::lp_ratio_experiment(t, c.p, {f}).front();
  const auto hardy = slp::hardy_functionals(t, c.p);
  rep["module"] = json{{"green",
                        {{"f", fexpr.format()},
                         {"p", report::num(c.p)},
                         {"ode_residual", report::num(res)},
                         {"truncation_error", report::num(sol.truncation_error)},
                         {"skipped", ratio.skipped},
                         {"y_norm", report::num(ratio.y_norm)},
                         {"f_norm", report::num(ratio.f_norm)},
                         {"ratio", report::num(ratio.ratio)},
                         {"norm_upper", report::num(hardy.upper)}}}};
  const auto dir = out_dir(c);
  if (!dir.empty()) rep["artifacts"].push_back(report::write_green_csv(sol, dir));
  say(c) << "green: residual " << slp::detail::format_number(res) << ", ||y||/||f|| = "
            << slp::detail::format_number(ratio.ratio) << " <= " << slp::detail::format_number(hardy.upper) << "\n";
}

void run_hardy(const RunConfig& c, const slp::CoefficientPair& pair, json& rep) {
  check_p(c.p);
  validate_or_throw(pair, c, rep);
  const slp::Equation eq(pair);
  const auto t = fss_for(eq, c);
  const auto h = slp::hardy_functionals(t, c.p);
  rep["module"] = json{{"hardy", report::to_json(h)}};
  const auto dir = out_dir(c);
  if (!dir.empty()) rep["artifacts"].push_back(report::write_hardy_csv(h, dir));
  say(c) << "H_p = " << slp::detail::format_number(std::max(h.phi1.value, h.phi2.value)) << "  (Phi1 "
            << slp::detail::format_number(h.phi1.value) << ", Phi2 " << slp::detail::format_number(h.phi2.value)
            << "), operator norm in [" << slp::detail::format_number(h.lower) << ", "
            << slp::detail::format_number(h.upper) << "]\n";
}

void run_covering(const RunConfig& c, const slp::CoefficientPair& pair, json& rep) {
  if (!(c.base >= c.a() && c.base <= c.b())) throw ConfigError("base must lie inside the window");
  validate_or_throw(pair, c, rep);
  const slp::Equation eq(pair);
  const double m = slp::default_margin(c.a(), c.b());
  slp::HFieldOptions ho;
  ho.workers = c.workers;
  const slp::HField hf(eq, c.a() - m, c.b() + m, ho);
  const auto cov = slp::build_covering(hf, c.base, c.a(), c.b(), c.tol);
  double defect = 0.0;
  for (const auto& s : cov.segments) defect = std::max(defect, std::fabs(s.rh_from_base - (std::abs(s.n) - 1)));
  json segs = json::array();
  for (const auto& s : cov.segments)
    segs.push_back(json{{"n", s.n}, {"lo", report::num(s.lo)}, {"x", report::num(s.x)}, {"hi", report::num(s.hi)},
                        {"rh_from_base", report::num(s.rh_from_base)}});
  rep["module"] = json{{"covering",
                        {{"base", report::num(cov.base_x)},
                         {"segments", segs},
                         {"count", cov.segments.size()},
                         {"truncated", cov.truncated},
                         {"note", cov.note},
                         {"cumulative_defect_max", report::num(defect)}}}};
  const auto dir = out_dir(c);
  if (!dir.empty()) rep["artifacts"].push_back(report::write_covering_csv(cov, dir));
  say(c) << "covering: " << cov.segments.size() << " segments, max |cumulative - (|n| - 1)| = "
            << slp::detail::format_number(defect) << "\n";
}

void emit(const RunConfig& c, const json& rep) {
  if (c.out.empty()) {
    report::write_json(std::cout, rep);
    std::cout << "\n";
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  std::ofstream os(c.out + "/report.json");
  if (!os) {
    std::cerr << "error: cannot write " << c.out << "/report.json\n";
    return;
  }
  os << report::to_text(rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correct solvability of -(r y')' + q y = f in L_p(R)"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&cfg](CLI::App* sub) {
    sub->add_option("--r", cfg.r_text, "coefficient r(x)");
    sub->add_option("--q", cfg.q_text, "coefficient q(x)");
    sub->add_option("--preset", cfg.preset, "named pair, e.g. constant(2) or example-4.5(0.5)");
    sub->add_option("--window", cfg.window, "window A B")->expected(2);
    sub->add_option("--grid", cfg.grid, "grid points");
    sub->add_option("--tol", cfg.tol, "root and quadrature tolerance");
    sub->add_option("--workers", cfg.workers, "threads for grid evaluation")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "directory for report.json and CSV files (default: report to stdout)");
    sub->add_option("--declare-tails", cfg.declarations, "tail assertions such as right.q=divergent");
    return sub;
  };
  // Defaults are per subcommand; they are set when the subcommand is selected.
  struct Defaults {
    double a, b;
    std::size_t grid;
  };
  std::map<std::string, Defaults> defaults = {{"analyze", {-1000, 1000, 2049}}, {"aux", {-20, 20, 401}},
                                              {"fss", {-20, 20, 4001}},        {"green", {-40, 40, 4001}},
                                              {"hardy", {-40, 40, 4001}},      {"covering", {-2, 2, 401}}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, d] : defaults) {
    const char* help = name == "analyze"    ? "decide correct solvability and report every certificate"
                       : name == "aux"      ? "auxiliary functions d1, d2, phi, psi, h, d on a grid"
                       : name == "fss"      ? "fundamental system u, v, rho and the two-sided bounds"
                       : name == "green"    ? "apply the Green operator to a right-hand side"
                       : name == "hardy"    ? "Hardy functionals and the operator norm sandwich"
                                            : "covering segments around a base point";
    subs[name] = app.add_subcommand(name, help);
  }
  for (auto& [name, sub] : subs) common(sub);
  subs["analyze"]->add_option("--doublings,--nested", cfg.doublings, "nested window doublings (>= 3)");
  for (const char* n : {"green", "hardy"}) subs[n]->add_option("--p", cfg.p, "exponent, 1 < p < inf");
  subs["green"]->add_option("--f", cfg.f_text, "right-hand side f(x)");
  subs["covering"]->add_option("--base", cfg.base, "base point");

  // Option storage is shared between subcommands, so the selected one's
  // defaults go in before CLI11 fills in explicit values.
  for (int i = 1; i < argc; ++i) {
    auto it = defaults.find(argv[i]);
    if (it != defaults.end()) {
      cfg.window = {it->second.a, it->second.b};
      cfg.grid = it->second.grid;
      break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  for (auto& [name, sub] : subs)
    if (sub->parsed()) cfg.command = name;

  json rep = report::skeleton(meta(cfg, nullptr));
  int rc = 0;
  try {
    check_window(cfg);
    const auto pair = coefficients(cfg);
    rep["meta"] = meta(cfg, &pair);
    if (cfg.command == "analyze")
      run_analyze(cfg, pair, rep);
    else if (cfg.command == "aux")
      run_aux(cfg, pair, rep);
    else if (cfg.command == "fss")
      run_fss(cfg, pair, rep);
    else if (cfg.command == "green")
      run_green(cfg, pair, rep);
    else if (cfg.command == "hardy")
      run_hardy(cfg, pair, rep);
    else
      run_covering(cfg, pair, rep);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    rep["errors"] = json::array({e.what()});
    rc = kExitConfig;
  } catch (const slp::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    rep["errors"] = json::array({e.what()});
    rc = kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    rep["errors"] = json::array({e.what()});
    rc = kExitNumerical;
  }
  try {
    emit(cfg, rep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (rc == 0) rc = kExitNumerical;
  }
  return rc;
}
