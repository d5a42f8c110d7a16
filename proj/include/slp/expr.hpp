#pragma once

// Coefficient expression language.
//
//   expr  := sum
//   sum   := prod (('+' | '-') prod)*
//   prod  := unary (('*' | '/') unary)*
//   unary := '-' unary | pow
//   pow   := atom ('^' unary)?
//   atom  := number | 'x' | '(' expr ')' | func '(' args ')'
//          | 'piecewise' '(' (cmp ':' expr ',')+ 'else' ':' expr ')'
//   cmp   := expr ('<' | '<=' | '>' | '>=') expr
//
// func is one of abs sin cos exp log sqrt (one argument) or pow min max (two).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slp/error.hpp"

namespace slp {

enum class Op : std::uint8_t { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call, Piecewise };
enum class Func : std::uint8_t { Abs, Sin, Cos, Exp, Log, Sqrt, Pow, Min, Max };
enum class Cmp : std::uint8_t { Lt, Le, Gt, Ge };

struct Node {
  Op op = Op::Const;
  Func func = Func::Abs;
  double value = 0.0;
  std::int32_t lhs = -1;  // first operand / first argument / else branch
  std::int32_t rhs = -1;  // second operand / second argument
  std::int32_t first_branch = 0;
  std::int32_t branch_count = 0;
  int column = 1;
};

struct Branch {
  Cmp cmp = Cmp::Lt;
  std::int32_t lhs = -1;
  std::int32_t rhs = -1;
  std::int32_t value = -1;
};

namespace detail {

struct FuncInfo {
  std::string_view name;
  Func func;
  int arity;
};

inline constexpr FuncInfo kFunctions[] = {
    {"abs", Func::Abs, 1}, {"sin", Func::Sin, 1},  {"cos", Func::Cos, 1},
    {"exp", Func::Exp, 1}, {"log", Func::Log, 1},  {"sqrt", Func::Sqrt, 1},
    {"pow", Func::Pow, 2}, {"min", Func::Min, 2}, {"max", Func::Max, 2},
};

// Squares are formed by a single rounded multiply.
inline double power(double a, double b) { return b == 2.0 ? a * a : std::pow(a, b); }

inline const FuncInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

inline std::string_view function_name(Func f) {
  for (const auto& info : kFunctions)
    if (info.func == f) return info.name;
  return "?";
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Immutable parsed expression in x. Cheap to copy (shared storage).
class Expression {
 public:
  Expression() = default;

  double operator()(double x) const { return eval(root(), x); }

  /// Evaluates the subtree rooted at `node`.
  double eval(std::int32_t node, double x) const;

  std::int32_t root() const noexcept { return data_ ? data_->root : -1; }
  const Node& node(std::int32_t i) const { return data_->nodes[static_cast<std::size_t>(i)]; }
  const Branch& branch(std::int32_t i) const {
    return data_->branches[static_cast<std::size_t>(i)];
  }
  bool empty() const noexcept { return !data_; }

  /// Fully parenthesised text that re-parses to a structurally equal tree.
  std::string format() const { return empty() ? std::string() : format(root()); }

  bool depends_on_x() const { return !empty() && depends_on_x(root()); }

  /// Value of an expression that does not mention x.
  std::optional<double> constant_value() const {
    if (empty() || depends_on_x()) return std::nullopt;
    return eval(root(), 0.0);
  }

  /// Points where a piecewise guard, abs, min or max switches. Found by a
  /// sign-change scan over a symmetric log-spaced sample set in
  /// [-1e12, 1e12], so switches of oscillating guards may be missed.
  std::vector<double> breakpoints() const;

  friend bool operator==(const Expression& a, const Expression& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    return equal_subtree(a, a.root(), b, b.root());
  }

 private:
  friend class Parser;

  struct Data {
    std::vector<Node> nodes;
    std::vector<Branch> branches;
    std::int32_t root = -1;
  };

  std::string format(std::int32_t i) const;
  bool depends_on_x(std::int32_t i) const;
  void collect_switches(std::int32_t i, std::vector<std::pair<std::int32_t, std::int32_t>>& out) const;
  static bool equal_subtree(const Expression& a, std::int32_t i, const Expression& b, std::int32_t j);
  [[noreturn]] static void domain_error(const Node& n, const char* what, double x);

  std::shared_ptr<const Data> data_;
};

inline void Expression::domain_error(const Node& n, const char* what, double x) {
  throw DomainError(std::string(what) + " at x = " + detail::format_number(x) + " (column " +
                        std::to_string(n.column) + ")",
                    n.column, x);
}

inline double Expression::eval(std::int32_t i, double x) const {
  const Node& n = node(i);
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Var:
      return x;
    case Op::Neg:
      return -eval(n.lhs, x);
    case Op::Add:
      return eval(n.lhs, x) + eval(n.rhs, x);
    case Op::Sub:
      return eval(n.lhs, x) - eval(n.rhs, x);
    case Op::Mul:
      return eval(n.lhs, x) * eval(n.rhs, x);
    case Op::Div: {
      const double den = eval(n.rhs, x);
      if (den == 0.0) domain_error(n, "division by zero", x);
      return eval(n.lhs, x) / den;
    }
    case Op::Pow: {
      const double r = detail::power(eval(n.lhs, x), eval(n.rhs, x));
      if (!std::isfinite(r)) domain_error(n, "non-finite power", x);
      return r;
    }
    case Op::Call: {
      const double a = eval(n.lhs, x);
      switch (n.func) {
        case Func::Abs:
          return std::fabs(a);
        case Func::Sin:
          return std::sin(a);
        case Func::Cos:
          return std::cos(a);
        case Func::Exp: {
          const double r = std::exp(a);
          if (!std::isfinite(r)) domain_error(n, "exp overflow", x);
          return r;
        }
        case Func::Log:
          if (!(a > 0.0)) domain_error(n, "log of non-positive value", x);
          return std::log(a);
        case Func::Sqrt:
          if (a < 0.0) domain_error(n, "sqrt of negative value", x);
          return std::sqrt(a);
        case Func::Pow: {
          const double r = detail::power(a, eval(n.rhs, x));
          if (!std::isfinite(r)) domain_error(n, "non-finite power", x);
          return r;
        }
        case Func::Min:
          return std::min(a, eval(n.rhs, x));
        case Func::Max:
          return std::max(a, eval(n.rhs, x));
      }
      return a;
    }
    case Op::Piecewise: {
      for (std::int32_t k = 0; k < n.branch_count; ++k) {
        const Branch& b = branch(n.first_branch + k);
        const double l = eval(b.lhs, x);
        const double r = eval(b.rhs, x);
        bool hit = false;
        switch (b.cmp) {
          case Cmp::Lt: hit = l < r; break;
          case Cmp::Le: hit = l <= r; break;
          case Cmp::Gt: hit = l > r; break;
          case Cmp::Ge: hit = l >= r; break;
        }
        if (hit) return eval(b.value, x);
      }
      return eval(n.lhs, x);
    }
  }
  return 0.0;
}

inline std::string Expression::format(std::int32_t i) const {
  const Node& n = node(i);
  switch (n.op) {
    case Op::Const:
      return detail::format_number(n.value);
    case Op::Var:
      return "x";
    case Op::Neg:
      return "(-" + format(n.lhs) + ")";
    case Op::Add:
      return "(" + format(n.lhs) + " + " + format(n.rhs) + ")";
    case Op::Sub:
      return "(" + format(n.lhs) + " - " + format(n.rhs) + ")";
    case Op::Mul:
      return "(" + format(n.lhs) + " * " + format(n.rhs) + ")";
    case Op::Div:
      return "(" + format(n.lhs) + " / " + format(n.rhs) + ")";
    case Op::Pow:
      return "(" + format(n.lhs) + " ^ " + format(n.rhs) + ")";
    case Op::Call: {
      std::string s(detail::function_name(n.func));
      s += "(" + format(n.lhs);
      if (n.rhs >= 0) s += ", " + format(n.rhs);
      return s + ")";
    }
    case Op::Piecewise: {
      static constexpr const char* kCmp[] = {"<", "<=", ">", ">="};
      std::string s = "piecewise(";
      for (std::int32_t k = 0; k < n.branch_count; ++k) {
        const Branch& b = branch(n.first_branch + k);
        s += format(b.lhs) + " " + kCmp[static_cast<int>(b.cmp)] + " " + format(b.rhs) + ": " +
             format(b.value) + ", ";
      }
      return s + "else: " + format(n.lhs) + ")";
    }
  }
  return {};
}

inline bool Expression::depends_on_x(std::int32_t i) const {
  const Node& n = node(i);
  switch (n.op) {
    case Op::Const:
      return false;
    case Op::Var:
      return true;
    case Op::Piecewise:
      for (std::int32_t k = 0; k < n.branch_count; ++k) {
        const Branch& b = branch(n.first_branch + k);
        if (depends_on_x(b.lhs) || depends_on_x(b.rhs) || depends_on_x(b.value)) return true;
      }
      return depends_on_x(n.lhs);
    default:
      return (n.lhs >= 0 && depends_on_x(n.lhs)) || (n.rhs >= 0 && depends_on_x(n.rhs));
  }
}

inline bool Expression::equal_subtree(const Expression& a, std::int32_t i, const Expression& b,
                                      std::int32_t j) {
  const Node& m = a.node(i);
  const Node& n = b.node(j);
  if (m.op != n.op) return false;
  switch (m.op) {
    case Op::Const:
      return m.value == n.value || (std::isnan(m.value) && std::isnan(n.value));
    case Op::Var:
      return true;
    case Op::Call:
      if (m.func != n.func || (m.rhs >= 0) != (n.rhs >= 0)) return false;
      return equal_subtree(a, m.lhs, b, n.lhs) && (m.rhs < 0 || equal_subtree(a, m.rhs, b, n.rhs));
    case Op::Piecewise:
      if (m.branch_count != n.branch_count) return false;
      for (std::int32_t k = 0; k < m.branch_count; ++k) {
        const Branch& p = a.branch(m.first_branch + k);
        const Branch& q = b.branch(n.first_branch + k);
        if (p.cmp != q.cmp || !equal_subtree(a, p.lhs, b, q.lhs) ||
            !equal_subtree(a, p.rhs, b, q.rhs) || !equal_subtree(a, p.value, b, q.value))
          return false;
      }
      return equal_subtree(a, m.lhs, b, n.lhs);
    case Op::Neg:
      return equal_subtree(a, m.lhs, b, n.lhs);
    default:
      return equal_subtree(a, m.lhs, b, n.lhs) && equal_subtree(a, m.rhs, b, n.rhs);
  }
}

// Collects (lhs, rhs) pairs whose difference changes sign where the
// expression switches regime. rhs < 0 means "compare lhs against zero".
inline void Expression::collect_switches(
    std::int32_t i, std::vector<std::pair<std::int32_t, std::int32_t>>& out) const {
  const Node& n = node(i);
  switch (n.op) {
    case Op::Const:
    case Op::Var:
      return;
    case Op::Piecewise:
      for (std::int32_t k = 0; k < n.branch_count; ++k) {
        const Branch& b = branch(n.first_branch + k);
        out.emplace_back(b.lhs, b.rhs);
        collect_switches(b.lhs, out);
        collect_switches(b.rhs, out);
        collect_switches(b.value, out);
      }
      collect_switches(n.lhs, out);
      return;
    case Op::Call:
      if (n.func == Func::Abs) out.emplace_back(n.lhs, -1);
      if (n.func == Func::Min || n.func == Func::Max) out.emplace_back(n.lhs, n.rhs);
      [[fallthrough]];
    default:
      if (n.lhs >= 0) collect_switches(n.lhs, out);
      if (n.rhs >= 0) collect_switches(n.rhs, out);
  }
}

inline std::vector<double> Expression::breakpoints() const {
  std::vector<double> result;
  if (empty()) return result;
  std::vector<std::pair<std::int32_t, std::int32_t>> switches;
  collect_switches(root(), switches);
  if (switches.empty()) return result;

  std::vector<double> samples;
  samples.push_back(0.0);
  for (int k = -6 * 32; k <= 12 * 32; ++k) {
    const double v = std::pow(10.0, k / 32.0);
    samples.push_back(v);
    samples.push_back(-v);
  }
  std::sort(samples.begin(), samples.end());

  for (const auto& [l, r] : switches) {
    if (!depends_on_x(l) && (r < 0 || !depends_on_x(r))) continue;
    auto g = [&](double x) -> std::optional<double> {
      try {
        const double v = eval(l, x) - (r >= 0 ? eval(r, x) : 0.0);
        if (std::isfinite(v)) return v;
      } catch (const DomainError&) {
      }
      return std::nullopt;
    };
    std::optional<double> prev;
    double prev_x = 0.0;
    for (double x : samples) {
      auto cur = g(x);
      if (!cur) {
        prev.reset();
        continue;
      }
      if (*cur == 0.0) result.push_back(x);
      if (prev && *prev != 0.0 && *cur != 0.0 && ((*prev < 0.0) != (*cur < 0.0))) {
        double lo = prev_x, hi = x;
        const bool lo_negative = *prev < 0.0;
        for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          auto gm = g(mid);
          if (!gm) break;
          if (*gm == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((*gm < 0.0) == lo_negative)
            lo = mid;
          else
            hi = mid;
        }
        // Snap to the endpoint whose guard is exactly zero, if any.
        auto glo = g(lo), ghi = g(hi);
        result.push_back((ghi && *ghi == 0.0) ? hi : (glo && *glo == 0.0) ? lo : hi);
      }
      prev = cur;
      prev_x = x;
    }
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

/// Recursive-descent parser producing an Expression.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression parse() {
    data_ = std::make_shared<Expression::Data>();
    const std::int32_t root = parse_sum();
    skip_space();
    if (pos_ < text_.size())
      fail("unexpected '" + std::string(1, text_[pos_]) + "'", {"+", "-", "*", "/", "^", "end of input"});
    data_->root = root;
    Expression e;
    e.data_ = std::move(data_);
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  int column() const { return static_cast<int>(pos_) + 1; }

  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) {
    skip_space();
    int col = column();
    std::string msg = what;
    if (pos_ >= text_.size()) {
      // Point at the last token so the caret lands on something visible.
      col = last_token_column_;
      msg = "unexpected end of input after column " + std::to_string(col);
    }
    msg = "syntax error at column " + std::to_string(col) + ": " + msg;
    if (!expected.empty()) {
      msg += "; expected one of:";
      for (const auto& e : expected) msg += " " + e;
    }
    throw ParseError(msg, col, std::move(expected));
  }

  void mark() { last_token_column_ = column(); }

  void expect(char c) {
    if (peek() != c) {
      if (at_end()) fail("", {std::string(1, c)});
      fail("unexpected '" + std::string(1, text_[pos_]) + "'", {std::string(1, c)});
    }
    mark();
    ++pos_;
  }

  std::int32_t add(Node n) {
    data_->nodes.push_back(n);
    return static_cast<std::int32_t>(data_->nodes.size() - 1);
  }

  std::int32_t binary(Op op, std::int32_t l, std::int32_t r, int col) {
    Node n;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    n.column = col;
    return add(n);
  }

  std::int32_t parse_sum() {
    std::int32_t lhs = parse_prod();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      const int col = column();
      mark();
      ++pos_;
      lhs = binary(c == '+' ? Op::Add : Op::Sub, lhs, parse_prod(), col);
    }
  }

  std::int32_t parse_prod() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      const int col = column();
      mark();
      ++pos_;
      lhs = binary(c == '*' ? Op::Mul : Op::Div, lhs, parse_unary(), col);
    }
  }

  std::int32_t parse_unary() {
    if (peek() == '-') {
      const int col = column();
      mark();
      ++pos_;
      return binary(Op::Neg, parse_unary(), -1, col);
    }
    return parse_pow();
  }

  std::int32_t parse_pow() {
    const std::int32_t base = parse_atom();
    if (peek() == '^') {
      const int col = column();
      mark();
      ++pos_;
      return binary(Op::Pow, base, parse_unary(), col);
    }
    return base;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::int32_t parse_number() {
    const int col = column();
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) {
      pos_ = start;
      fail("malformed number", {"digit"});
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    const std::string literal(text_.substr(start, pos_ - start));
    const double v = std::strtod(literal.c_str(), nullptr);
    if (!std::isfinite(v)) {
      pos_ = start;
      fail("number literal out of range", {"finite number"});
    }
    last_token_column_ = col;
    Node node;
    node.op = Op::Const;
    node.value = v;
    node.column = col;
    return add(node);
  }

  std::int32_t parse_atom() {
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      mark();
      ++pos_;
      const std::int32_t inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const int col = column();
      const std::size_t start = pos_;
      const std::string name = identifier();
      last_token_column_ = col;
      if (name == "x") {
        Node n;
        n.op = Op::Var;
        n.column = col;
        return add(n);
      }
      if (name == "piecewise") return parse_piecewise(col);
      const auto* info = detail::find_function(name);
      if (!info) {
        pos_ = start;
        throw ParseError("unknown function '" + name + "' at column " + std::to_string(col) +
                             "; allowed: abs sin cos exp log sqrt pow min max",
                         col, {"abs", "sin", "cos", "exp", "log", "sqrt", "pow", "min", "max"});
      }
      expect('(');
      Node n;
      n.op = Op::Call;
      n.func = info->func;
      n.column = col;
      n.lhs = parse_sum();
      if (info->arity == 2) {
        expect(',');
        n.rhs = parse_sum();
      }
      expect(')');
      return add(n);
    }
    if (at_end()) fail("", {"number", "x", "(", "-", "function"});
    fail("unexpected '" + std::string(1, c) + "'", {"number", "x", "(", "-", "function"});
  }

  Cmp parse_cmp() {
    const char c = peek();
    if (c != '<' && c != '>') {
      if (at_end()) fail("", {"<", "<=", ">", ">="});
      fail("unexpected '" + std::string(1, c) + "'", {"<", "<=", ">", ">="});
    }
    mark();
    ++pos_;
    const bool eq = pos_ < text_.size() && text_[pos_] == '=';
    if (eq) ++pos_;
    if (c == '<') return eq ? Cmp::Le : Cmp::Lt;
    return eq ? Cmp::Ge : Cmp::Gt;
  }

  std::int32_t parse_piecewise(int col) {
    expect('(');
    std::vector<Branch> branches;
    for (;;) {
      skip_space();
      const std::size_t save = pos_;
      if (std::isalpha(static_cast<unsigned char>(peek()))) {
        const int else_col = column();
        if (identifier() == "else") {
          last_token_column_ = else_col;
          if (branches.empty()) fail("piecewise needs at least one guarded branch", {"comparison"});
          expect(':');
          const std::int32_t otherwise = parse_sum();
          expect(')');
          Node n;
          n.op = Op::Piecewise;
          n.lhs = otherwise;
          n.column = col;
          n.first_branch = static_cast<std::int32_t>(data_->branches.size());
          n.branch_count = static_cast<std::int32_t>(branches.size());
          data_->branches.insert(data_->branches.end(), branches.begin(), branches.end());
          return add(n);
        }
        pos_ = save;
      }
      Branch b;
      b.lhs = parse_sum();
      b.cmp = parse_cmp();
      b.rhs = parse_sum();
      expect(':');
      b.value = parse_sum();
      branches.push_back(b);
      if (peek() == ')')
        throw ParseError("non-exhaustive piecewise at column " + std::to_string(col) +
                             ": a final 'else: expr' branch is required",
                         col, {"else"});
      expect(',');
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int last_token_column_ = 1;
  std::shared_ptr<Expression::Data> data_;
};

inline Expression parse_expression(std::string_view text) { return Parser(text).parse(); }

inline double evaluate(const Expression& e, double x) { return e(x); }

}  // namespace slp
