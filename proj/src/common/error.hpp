#pragma once

#include <stdexcept>
#include <string>

namespace stochsym {

enum class ErrorCode {
  Parse,
  UnknownVariable,
  Domain,
  Dimension,
  Invariant,
  ZeroCoefficient,
  Monotonicity,
  Inversion,
  SingularJacobian,
  CompatibilityFailed,
  NonIntegrable,
  CovMismatch,
  StageFailure,
  Unsupported,
  DegenerateSampling,
  TooFewPaths,
  IncrementMismatch,
  BetaYDependence,
  Io,
  Usage,
  Internal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Syntax errors carry a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(ErrorCode::Parse, message + " at line " + std::to_string(line) +
                                    ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

// Evaluation hit a singular operation; `subexpression` is the printed node.
class DomainError : public Error {
 public:
  DomainError(const std::string& what_happened, std::string subexpression)
      : Error(ErrorCode::Domain, what_happened + " in '" + subexpression + "'"),
        subexpression_(std::move(subexpression)) {}

  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

}  // namespace stochsym
