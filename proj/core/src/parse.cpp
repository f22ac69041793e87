// Recursive-descent parser for the expression DSL.
//
//   expr    := term { ('+' | '-') term }
//   term    := unary { ('*' | '/') unary }
//   unary   := ('-' | '+') unary | power
//   power   := primary [ '^' ['-' | '+'] INTEGER ]
//   primary := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
//   FUNC    := sin | cos | exp | log | sqrt

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "ksym/errors.hpp"
#include "ksym/expr.hpp"

namespace ksym {

namespace {

class Parser {
 public:
  Parser(std::string_view src, const VarTable* vars) : src_(src), vars_(vars) {}

  Expr parse_all() {
    Expr e = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        lhs = lhs / unary();
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    bool negative = false;
    if (accept('-')) {
      negative = true;
    } else {
      accept('+');
    }
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) {
      pos_ = start;
      fail("expected an integer exponent after '^'");
    }
    int exponent = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, exponent);
    if (ec != std::errc{} || ptr != src_.data() + pos_) {
      pos_ = start;
      fail("exponent out of range");
    }
    if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E')) {
      fail("only integer exponents are supported");
    }
    return pow(base, negative ? -exponent : exponent);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc{} || ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr(value);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));

    static constexpr std::string_view kFunctions[] = {"sin", "cos", "exp", "log", "sqrt"};
    for (auto fn : kFunctions) {
      if (name != fn) continue;
      if (!accept('(')) fail("expected '(' after function '" + name + "'");
      Expr arg = expression();
      if (!accept(')')) fail("expected ')'");
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      if (name == "exp") return exp(arg);
      if (name == "log") return log(arg);
      return sqrt(arg);
    }

    if (vars_ != nullptr) {
      if (vars_->declares(name)) return Expr::variable(name);
      if (auto c = vars_->constant(name)) return Expr(*c);
    }
    if (name == "pi") return Expr(std::numbers::pi);
    throw UndeclaredIdentifier(name, start);
  }

  std::string_view src_;
  const VarTable* vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source, const VarTable& vars) { return Parser(source, &vars).parse_all(); }

double parse_constant(std::string_view source) {
  return eval(Parser(source, nullptr).parse_all(), {});
}

}  // namespace ksym
