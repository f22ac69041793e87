#include "ksym/expr.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "ksym/errors.hpp"

namespace ksym {

namespace {

// The literal 0 is represented by a null node so that default-constructed
// children inside ExprNode need no allocation.
const ExprNode& zero_node() {
  static const ExprNode node{};
  return node;
}

double ipow(double base, int exponent) {
  if (exponent < 0) return 1.0 / ipow(base, -exponent);
  double result = 1.0;
  double b = base;
  unsigned e = static_cast<unsigned>(exponent);
  while (e != 0) {
    if (e & 1U) result *= b;
    e >>= 1U;
    if (e != 0) b *= b;
  }
  return result;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Neg: return "negation";
    case Op::Pow: return "^";
    default: return "?";
  }
}

double checked(double result, Op op) {
  if (!std::isfinite(result)) {
    throw DomainError(std::string("non-finite result in '") + op_name(op) + "'");
  }
  return result;
}

double apply_unary(Op op, double x) {
  switch (op) {
    case Op::Neg: return -x;
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Exp: return std::exp(x);
    case Op::Log: return std::log(x);
    case Op::Sqrt: return std::sqrt(x);
    default: throw std::logic_error("not a unary op");
  }
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    default: throw std::logic_error("not a binary op");
  }
}

}  // namespace

Expr::Expr() = default;

Expr::Expr(double value) {
  if (value == 0.0 && !std::signbit(value)) return;
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Const;
  n->value = value;
  node_ = std::move(n);
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Var;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const ExprNode>(std::move(n)));
}

const ExprNode& Expr::node() const noexcept { return node_ ? *node_ : zero_node(); }

Op Expr::op() const noexcept { return node().op; }
double Expr::value() const noexcept { return node().value; }
const std::string& Expr::name() const noexcept { return node().name; }
int Expr::exponent() const noexcept { return node().exponent; }
const Expr& Expr::child(int i) const { return node().children.at(static_cast<std::size_t>(i)); }
int Expr::arity() const noexcept { return node().arity; }

Expr Expr::make(Op op, Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->arity = (op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div) ? 2 : 1;
  n->children[0] = std::move(a);
  if (n->arity == 2) n->children[1] = std::move(b);
  return Expr(std::shared_ptr<const ExprNode>(std::move(n)));
}

Expr Expr::scaled(double c, const Expr& x) {
  if (c == 0.0) return Expr();
  if (c == 1.0) return x;
  if (c == -1.0) return make(Op::Neg, x);
  return make(Op::Mul, Expr(c), x);
}

Expr Expr::make_pow(Expr base, int exponent) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Pow;
  n->arity = 1;
  n->exponent = exponent;
  n->children[0] = std::move(base);
  return Expr(std::shared_ptr<const ExprNode>(std::move(n)));
}

namespace {

// Folds a constant result only when it stays finite, so that e.g. 1/0 is kept
// symbolic and reported as a domain error at evaluation time.
std::optional<Expr> fold(double value) {
  if (std::isfinite(value)) return Expr(value);
  return std::nullopt;
}

bool has_coefficient(const Expr& x) { return x.op() == Op::Mul && x.child(0).is_constant(); }

bool power_of_two(double d) {
  int exp = 0;
  return std::frexp(std::abs(d), &exp) == 0.5;
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto f = fold(a.value() + b.value())) return *f;
  }
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (b.op() == Op::Neg) return a - b.child(0);
  if (has_coefficient(b) && b.child(0).value() < 0.0) return a - Expr::scaled(-b.child(0).value(), b.child(1));
  return Expr::make(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto f = fold(a.value() - b.value())) return *f;
  }
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (b.op() == Op::Neg) return a + b.child(0);
  if (has_coefficient(b) && b.child(0).value() < 0.0) return a + Expr::scaled(-b.child(0).value(), b.child(1));
  return Expr::make(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto f = fold(a.value() * b.value())) return *f;
  }
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (a.is_constant() || b.is_constant()) {
    const double c = a.is_constant() ? a.value() : b.value();
    const Expr& x = a.is_constant() ? b : a;
    if (has_coefficient(x)) {
      if (auto f = fold(c * x.child(0).value())) return Expr::scaled(f->value(), x.child(1));
    } else if (x.op() == Op::Neg) {
      return Expr::scaled(-c, x.child(0));
    } else {
      return Expr::scaled(c, x);
    }
  }
  if (a.op() == Op::Neg) return -(a.child(0) * b);
  if (b.op() == Op::Neg) return -(a * b.child(0));
  return Expr::make(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto f = fold(a.value() / b.value())) return *f;
  }
  if (a.is_zero() && !b.is_zero()) return Expr();
  if (b.is_one()) return a;
  if (b.is_constant() && b.value() != 0.0 && has_coefficient(a)) {
    const double q = a.child(0).value() / b.value();
    if (std::isfinite(q) && (q == std::trunc(q) || power_of_two(b.value()))) return Expr::scaled(q, a.child(1));
  }
  return Expr::make(Op::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.op() == Op::Neg) return a.child(0);
  if (has_coefficient(a)) return Expr::scaled(-a.child(0).value(), a.child(1));
  return Expr::make(Op::Neg, a);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr(1.0);
  if (exponent == 1) return base;
  if (base.is_constant()) {
    if (auto f = fold(ipow(base.value(), exponent))) return *f;
  }
  if (base.is_zero() && exponent > 0) return Expr();
  if (base.is_one()) return Expr(1.0);
  return Expr::make_pow(base, exponent);
}

Expr Expr::unary(Op op, const Expr& x, double (*fn)(double)) {
  if (x.is_constant()) {
    if (auto f = fold(fn(x.value()))) return *f;
  }
  return Expr::make(op, x);
}

namespace {

double sin_d(double x) { return std::sin(x); }
double cos_d(double x) { return std::cos(x); }
double exp_d(double x) { return std::exp(x); }
double log_d(double x) { return std::log(x); }
double sqrt_d(double x) { return std::sqrt(x); }

}  // namespace

Expr sin(const Expr& x) { return Expr::unary(Op::Sin, x, sin_d); }
Expr cos(const Expr& x) { return Expr::unary(Op::Cos, x, cos_d); }
Expr exp(const Expr& x) { return Expr::unary(Op::Exp, x, exp_d); }
Expr log(const Expr& x) { return Expr::unary(Op::Log, x, log_d); }
Expr sqrt(const Expr& x) { return Expr::unary(Op::Sqrt, x, sqrt_d); }

Expr diff(const Expr& e, std::string_view name) {
  switch (e.op()) {
    case Op::Const:
      return Expr();
    case Op::Var:
      return e.name() == name ? Expr(1.0) : Expr();
    case Op::Add:
      return diff(e.child(0), name) + diff(e.child(1), name);
    case Op::Sub:
      return diff(e.child(0), name) - diff(e.child(1), name);
    case Op::Mul: {
      const Expr& a = e.child(0);
      const Expr& b = e.child(1);
      return diff(a, name) * b + a * diff(b, name);
    }
    case Op::Div: {
      const Expr& a = e.child(0);
      const Expr& b = e.child(1);
      Expr da = diff(a, name);
      Expr db = diff(b, name);
      if (db.is_zero()) return da / b;
      return (da * b - a * db) / pow(b, 2);
    }
    case Op::Neg:
      return -diff(e.child(0), name);
    case Op::Pow: {
      const Expr& base = e.child(0);
      const int m = e.exponent();
      return Expr(static_cast<double>(m)) * pow(base, m - 1) * diff(base, name);
    }
    case Op::Sin:
      return cos(e.child(0)) * diff(e.child(0), name);
    case Op::Cos:
      return -(sin(e.child(0)) * diff(e.child(0), name));
    case Op::Exp:
      return e * diff(e.child(0), name);
    case Op::Log:
      return diff(e.child(0), name) / e.child(0);
    case Op::Sqrt:
      return diff(e.child(0), name) / (Expr(2.0) * e);
  }
  throw std::logic_error("diff: unknown op");
}

double eval(const Expr& e, const Bindings& bindings) {
  switch (e.op()) {
    case Op::Const:
      return e.value();
    case Op::Var: {
      auto it = bindings.find(e.name());
      if (it == bindings.end()) throw UnboundVariable(e.name());
      return it->second;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const double a = eval(e.child(0), bindings);
      const double b = eval(e.child(1), bindings);
      return checked(apply_binary(e.op(), a, b), e.op());
    }
    case Op::Pow:
      return checked(ipow(eval(e.child(0), bindings), e.exponent()), Op::Pow);
    default:
      return checked(apply_unary(e.op(), eval(e.child(0), bindings)), e.op());
  }
}

namespace {

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Const:
      return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    default:
      return 5;
  }
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  print(e, out);
  if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Const:
      out += format_number(e.value());
      return;
    case Op::Var:
      out += e.name();
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      print_wrapped(e.child(0), precedence(e.child(0)) < p, out);
      out += ' ';
      out += op_name(e.op());
      out += ' ';
      print_wrapped(e.child(1), precedence(e.child(1)) <= p, out);
      return;
    }
    case Op::Neg:
      out += '-';
      print_wrapped(e.child(0), precedence(e.child(0)) < 4, out);
      return;
    case Op::Pow:
      print_wrapped(e.child(0), precedence(e.child(0)) < 5, out);
      out += '^';
      out += std::to_string(e.exponent());
      return;
    default:
      out += op_name(e.op());
      out += '(';
      print(e.child(0), out);
      out += ')';
      return;
  }
}

void collect(const Expr& e, std::set<std::string>& out) {
  if (e.op() == Op::Var) {
    out.insert(e.name());
    return;
  }
  for (int i = 0; i < e.arity(); ++i) collect(e.child(i), out);
}

Expr rebuild(const Expr& e, const std::function<Expr(const Expr&)>& leaf) {
  switch (e.op()) {
    case Op::Const:
    case Op::Var:
      return leaf(e);
    case Op::Add: return rebuild(e.child(0), leaf) + rebuild(e.child(1), leaf);
    case Op::Sub: return rebuild(e.child(0), leaf) - rebuild(e.child(1), leaf);
    case Op::Mul: return rebuild(e.child(0), leaf) * rebuild(e.child(1), leaf);
    case Op::Div: return rebuild(e.child(0), leaf) / rebuild(e.child(1), leaf);
    case Op::Neg: return -rebuild(e.child(0), leaf);
    case Op::Pow: return pow(rebuild(e.child(0), leaf), e.exponent());
    case Op::Sin: return sin(rebuild(e.child(0), leaf));
    case Op::Cos: return cos(rebuild(e.child(0), leaf));
    case Op::Exp: return exp(rebuild(e.child(0), leaf));
    case Op::Log: return log(rebuild(e.child(0), leaf));
    case Op::Sqrt: return sqrt(rebuild(e.child(0), leaf));
  }
  throw std::logic_error("rebuild: unknown op");
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

bool depends_on(const Expr& e, std::string_view name) {
  if (e.op() == Op::Var) return e.name() == name;
  for (int i = 0; i < e.arity(); ++i) {
    if (depends_on(e.child(i), name)) return true;
  }
  return false;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements) {
  return rebuild(e, [&](const Expr& leaf) {
    if (leaf.op() == Op::Var) {
      auto it = replacements.find(leaf.name());
      if (it != replacements.end()) return it->second;
    }
    return leaf;
  });
}

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> slots) {
  std::size_t depth = 0;
  std::function<void(const Expr&)> emit = [&](const Expr& node) {
    switch (node.op()) {
      case Op::Const:
        program_.push_back({Op::Const, 0, node.value()});
        ++depth;
        break;
      case Op::Var: {
        int index = -1;
        for (std::size_t s = 0; s < slots.size(); ++s) {
          if (slots[s] == node.name()) {
            index = static_cast<int>(s);
            break;
          }
        }
        if (index < 0) throw UnboundVariable(node.name());
        program_.push_back({Op::Var, index, 0.0});
        ++depth;
        break;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
        emit(node.child(0));
        emit(node.child(1));
        program_.push_back({node.op(), 0, 0.0});
        --depth;
        break;
      case Op::Pow:
        emit(node.child(0));
        program_.push_back({Op::Pow, node.exponent(), 0.0});
        break;
      default:
        emit(node.child(0));
        program_.push_back({node.op(), 0, 0.0});
        break;
    }
    max_stack_ = std::max(max_stack_, depth);
  };
  emit(e);
}

double CompiledExpr::operator()(std::span<const double> values) const {
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_stack_ > kInline) {
    heap.resize(max_stack_);
    stack = heap.data();
  }
  std::size_t top = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::Const:
        stack[top++] = in.value;
        break;
      case Op::Var:
        stack[top++] = values[static_cast<std::size_t>(in.index)];
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: {
        const double b = stack[--top];
        const double a = stack[top - 1];
        stack[top - 1] = checked(apply_binary(in.op, a, b), in.op);
        break;
      }
      case Op::Pow:
        stack[top - 1] = checked(ipow(stack[top - 1], in.index), Op::Pow);
        break;
      default:
        stack[top - 1] = checked(apply_unary(in.op, stack[top - 1]), in.op);
        break;
    }
  }
  return program_.empty() ? 0.0 : stack[0];
}

}  // namespace ksym
