#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slp {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `column` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int column, std::vector<std::string> expected = {})
      : Error(what), column_(column), expected_(std::move(expected)) {}

  int column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  int column_;
  std::vector<std::string> expected_;
};

/// An expression node could not be evaluated at the requested point.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, int column, double x)
      : Error(what), column_(column), x_(x) {}

  int column() const noexcept { return column_; }
  double x() const noexcept { return x_; }

 private:
  int column_;
  double x_;
};

/// Quadrature, root finding or ODE integration did not reach its target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature used up its subdivision budget; the partial result
/// is finite but below the requested accuracy.
class QuadratureExhausted : public NumericalError {
 public:
  QuadratureExhausted(const std::string& what, double value, double error)
      : NumericalError(what), value_(value), error_(error) {}

  double value() const noexcept { return value_; }
  double error() const noexcept { return error_; }

 private:
  double value_;
  double error_;
};

/// Monotone bracket expansion hit its ceiling without reaching F = 1.
class BracketError : public NumericalError {
 public:
  BracketError(const std::string& what, double last_eta, double last_value)
      : NumericalError(what), last_eta_(last_eta), last_value_(last_value) {}

  double last_eta() const noexcept { return last_eta_; }
  double last_value() const noexcept { return last_value_; }

 private:
  double last_eta_;
  double last_value_;
};

/// An operation was called outside its documented preconditions.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace slp
