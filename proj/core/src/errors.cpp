#include "ksym/errors.hpp"

#include <utility>

namespace ksym {

ParseError::ParseError(std::string message, std::size_t offset)
    : Error("parse error at offset " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

UndeclaredIdentifier::UndeclaredIdentifier(std::string name, std::size_t offset)
    : Error("undeclared identifier '" + name + "' at offset " + std::to_string(offset)),
      name_(std::move(name)),
      offset_(offset) {}

UnboundVariable::UnboundVariable(std::string name)
    : Error("unbound variable '" + name + "'"), name_(std::move(name)) {}

VerificationFailure::VerificationFailure(std::string message, double residual)
    : Error(message + " (max residual " + std::to_string(residual) + ")"), residual_(residual) {}

}  // namespace ksym
