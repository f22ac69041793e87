#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ksym {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL text. `offset()` is the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UndeclaredIdentifier : public Error {
 public:
  UndeclaredIdentifier(std::string name, std::size_t offset);
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation produced a non-finite value (log of a negative, division by zero, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularHessian : public Error {
 public:
  using Error::Error;
};

/// Solver refused or aborted a run (non-hyperbolic model, non-finite state).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A symbolic precondition did not hold at the sampled points; carries the worst residual.
class VerificationFailure : public Error {
 public:
  VerificationFailure(std::string message, double residual);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace ksym
