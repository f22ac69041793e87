#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ksym/var_table.hpp"

namespace ksym {

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Log, Sqrt };

struct ExprNode;

/// Immutable scalar expression over named real coordinates.
///
/// Expressions share structure through reference-counted nodes and are never
/// mutated after construction, so copies are cheap and concurrent reads are
/// safe.  The arithmetic operators perform best-effort simplification only:
/// constant folding (when the folded value is finite) and the 0/1 identities.
class Expr {
 public:
  Expr();  // the literal 0
  Expr(double value);  // NOLINT(google-explicit-constructor): literals read naturally

  static Expr variable(std::string name);

  Op op() const noexcept;
  /// Literal value; only meaningful for Op::Const.
  double value() const noexcept;
  /// Variable name; only meaningful for Op::Var.
  const std::string& name() const noexcept;
  /// Integer exponent; only meaningful for Op::Pow.
  int exponent() const noexcept;
  /// Child `i` (0 for unary nodes and the base of Pow, 1 for the right operand).
  const Expr& child(int i) const;
  int arity() const noexcept;

  bool is_constant() const noexcept { return op() == Op::Const; }
  bool is_zero() const noexcept { return is_constant() && value() == 0.0; }
  bool is_one() const noexcept { return is_constant() && value() == 1.0; }

  /// Structural identity (same node), not mathematical equality.
  bool same_node(const Expr& other) const noexcept { return node_ == other.node_; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int exponent);
  friend Expr sin(const Expr& x);
  friend Expr cos(const Expr& x);
  friend Expr exp(const Expr& x);
  friend Expr log(const Expr& x);
  friend Expr sqrt(const Expr& x);

  Expr& operator+=(const Expr& other) { return *this = *this + other; }
  Expr& operator-=(const Expr& other) { return *this = *this - other; }
  Expr& operator*=(const Expr& other) { return *this = *this * other; }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  const ExprNode& node() const noexcept;
  static Expr make(Op op, Expr a, Expr b = {});
  static Expr make_pow(Expr base, int exponent);
  /// c * x in normal form: constant factors merged and kept on the left.
  static Expr scaled(double c, const Expr& x);
  static Expr unary(Op op, const Expr& x, double (*fn)(double));

  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  Op op = Op::Const;
  double value = 0.0;
  int exponent = 0;
  std::string name;
  std::array<Expr, 2> children;
  int arity = 0;
};

using Bindings = std::unordered_map<std::string, double>;

/// Exact symbolic partial derivative with respect to the variable `name`.
Expr diff(const Expr& e, std::string_view name);

/// IEEE double evaluation. Throws UnboundVariable or DomainError.
double eval(const Expr& e, const Bindings& bindings);

/// Prints in the DSL grammar; `parse(to_string(e))` evaluates bit-identically to `e`.
std::string to_string(const Expr& e);

std::set<std::string> free_variables(const Expr& e);
bool depends_on(const Expr& e, std::string_view name);

/// Simultaneous substitution of variables by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements);

/// Parses DSL text against the declared names of `vars` (plus the builtin `pi`).
/// Throws ParseError (with byte offset) or UndeclaredIdentifier.
Expr parse(std::string_view source, const VarTable& vars);

/// Parses an expression with no free variables and evaluates it.
double parse_constant(std::string_view source);

/// Expression compiled to a flat postfix program over a fixed variable order.
///
/// Evaluates bit-identically to `eval` with the corresponding bindings but
/// without name lookups; used on hot paths (integrators, sampled checks).
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, std::span<const std::string> slots);

  double operator()(std::span<const double> values) const;

 private:
  struct Instr {
    Op op;
    int index;  // variable slot for Var, exponent for Pow
    double value;
  };
  std::vector<Instr> program_;
  std::size_t max_stack_ = 0;
};

}  // namespace ksym
