#include <cmath>
#include <cstring>
#include <limits>
#include <thread>

#include "doctest.h"
#include "ksym/errors.hpp"
#include "ksym/expr.hpp"
#include "test_support.hpp"

using namespace ksym;
using ksym::testing::ExprGenerator;

namespace {

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("parse: grammar cases") {
  const VarTable one(1, 1);
  const Expr half_square = parse("v1_1^2/2", one);
  CHECK(eval(half_square, {{"v1_1", 3.0}}) == doctest::Approx(4.5));
  CHECK(free_variables(half_square) == std::set<std::string>{"v1_1"});

  const VarTable two(2, 2);
  const Expr e = parse("q1 + sin(q2)*v1_2", two);
  CHECK(free_variables(e) == std::set<std::string>{"q1", "q2", "v1_2"});

  CHECK(eval(parse("2 + 3*4", two), {}) == 14.0);
  CHECK(eval(parse("-2^2", two), {}) == -4.0);
  CHECK(eval(parse("2^-1", two), {}) == 0.5);
  CHECK(eval(parse("(1 + 2) * 3", two), {}) == 9.0);
  CHECK(eval(parse("1.5e2 - 2E-1", two), {}) == doctest::Approx(149.8));
  CHECK(eval(parse("  pi ", two), {}) == doctest::Approx(M_PI));
  CHECK(eval(parse("8/2/2", two), {}) == 2.0);
  CHECK(eval(parse("2 - 3 - 4", two), {}) == -5.0);
}

TEST_CASE("parse: constants and parameters") {
  const VarTable vars(1, 2, {{"m", 2.0}});
  const Expr e = parse("m^2*q1 + t2", vars);
  CHECK(free_variables(e) == std::set<std::string>{"q1", "t2"});
  CHECK(eval(e, {{"q1", 1.0}, {"t2", 0.5}}) == 4.5);
}

TEST_CASE("parse: errors carry locations") {
  const VarTable two(2, 1);
  try {
    parse("q1 + q3", two);
    FAIL("expected UndeclaredIdentifier");
  } catch (const UndeclaredIdentifier& e) {
    CHECK(e.name() == "q3");
    CHECK(e.offset() == 5);
  }
  try {
    parse("q1 + * 2", two);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }
  CHECK_THROWS_AS(parse("q1^1.5", two), ParseError);
  CHECK_THROWS_AS(parse("sin q1", two), ParseError);
  CHECK_THROWS_AS(parse("(q1", two), ParseError);
  CHECK_THROWS_AS(parse("q1)", two), ParseError);
  CHECK_THROWS_AS(parse("", two), ParseError);
  CHECK_THROWS_AS(parse("tan(q1)", two), UndeclaredIdentifier);
  CHECK_THROWS_AS(parse("v1_01", two), UndeclaredIdentifier);
}

TEST_CASE("diff: closed-form cases") {
  const VarTable vars(1, 1);
  const Expr half = parse("v1_1^2/2", vars);
  CHECK(eval(diff(half, "v1_1"), {{"v1_1", 1.7}}) == doctest::Approx(1.7));

  const Expr sv = parse("sin(q1)*v1_1", vars);
  const Bindings b{{"q1", 0.3}, {"v1_1", 2.0}};
  CHECK(eval(diff(sv, "q1"), b) == doctest::Approx(std::cos(0.3) * 2.0));
  CHECK(diff(sv, "t1").is_zero());

  const Expr quotient = parse("q1/(1 + q1^2)", vars);
  const double q = 0.7;
  CHECK(eval(diff(quotient, "q1"), {{"q1", q}}) == doctest::Approx((1 - q * q) / std::pow(1 + q * q, 2)));
  CHECK(eval(diff(parse("sqrt(q1)", vars), "q1"), {{"q1", 4.0}}) == doctest::Approx(0.25));
  CHECK(eval(diff(parse("log(q1)", vars), "q1"), {{"q1", 4.0}}) == doctest::Approx(0.25));
  CHECK(eval(diff(parse("exp(2*q1)", vars), "q1"), {{"q1", 0.0}}) == doctest::Approx(2.0));
  CHECK(eval(diff(parse("q1^-2", vars), "q1"), {{"q1", 2.0}}) == doctest::Approx(-0.25));
}

TEST_CASE("diff: introduces no new variables") {
  ExprGenerator gen({"q1", "q2", "v1_1"}, 11);
  for (int trial = 0; trial < 200; ++trial) {
    const Expr e = gen.wild(4);
    const auto fv = free_variables(e);
    for (const char* x : {"q1", "q2", "v1_1"}) {
      for (const auto& name : free_variables(diff(e, x))) CHECK(fv.count(name) == 1);
    }
  }
}

TEST_CASE("diff: finite-difference oracle on random polynomials") {
  ExprGenerator gen({"q1", "q2", "v1_1"}, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const Expr e = gen.polynomial(4);
    const Bindings b = gen.bindings(gen.point());
    const std::string x = gen.name(gen.pick(3));
    const double exact = eval(diff(e, x), b);
    const double approx = ksym::testing::simple_difference(e, b, x, 1e-5);
    CHECK(std::abs(exact - approx) <= 1e-6 * (1.0 + std::abs(exact)));
  }
}

TEST_CASE("diff: linearity and Clairaut") {
  ExprGenerator gen({"q1", "q2", "v1_1"}, 7);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e1 = gen.smooth(3);
    const Expr e2 = gen.smooth(3);
    const double a = gen.uniform(-2, 2);
    const double c = gen.uniform(-2, 2);
    const Bindings b = gen.bindings(gen.point());
    const double lhs = eval(diff(Expr(a) * e1 + Expr(c) * e2, "q1"), b);
    const double rhs = a * eval(diff(e1, "q1"), b) + c * eval(diff(e2, "q1"), b);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));

    const double xy = eval(diff(diff(e1, "q1"), "v1_1"), b);
    const double yx = eval(diff(diff(e1, "v1_1"), "q1"), b);
    CHECK(std::abs(xy - yx) <= 1e-10 * std::max(1.0, std::abs(xy)));
  }
}

TEST_CASE("eval: bindings and domain errors") {
  const VarTable vars(1, 1);
  CHECK(eval(parse("q1 + 2*v1_1", vars), {{"q1", 1.0}, {"v1_1", 3.0}}) == 7.0);
  CHECK_THROWS_AS(eval(parse("1/q1", vars), {{"q1", 0.0}}), DomainError);
  CHECK_THROWS_AS(eval(parse("log(q1)", vars), {{"q1", -1.0}}), DomainError);
  CHECK_THROWS_AS(eval(parse("sqrt(q1)", vars), {{"q1", -1.0}}), DomainError);
  CHECK_THROWS_AS(eval(parse("exp(q1)", vars), {{"q1", 1000.0}}), DomainError);
  CHECK_THROWS_AS(eval(parse("q1 + v1_1", vars), {{"q1", 1.0}}), UnboundVariable);
  // 1/0 is not folded away at construction time.
  CHECK_THROWS_AS(eval(parse("1/0", vars), {}), DomainError);
}

TEST_CASE("print/parse round trip is bit-exact on random ASTs") {
  const VarTable vars(2, 1);
  ExprGenerator gen({"q1", "q2", "v1_1"}, 3);
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = gen.wild(5);
    const std::string text = to_string(e);
    const Expr back = parse(text, vars);
    CAPTURE(text);
    for (int s = 0; s < 5; ++s) {
      const Bindings b = gen.bindings(gen.point());
      double x = 0.0, y = 0.0;
      bool x_ok = true, y_ok = true;
      try { x = eval(e, b); } catch (const DomainError&) { x_ok = false; }
      try { y = eval(back, b); } catch (const DomainError&) { y_ok = false; }
      CHECK(x_ok == y_ok);
      if (x_ok && y_ok) {
        CHECK(bit_equal(x, y));
        ++compared;
      }
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("printer keeps full precision and precedence") {
  const VarTable vars(1, 1);
  const Expr e = Expr(0.1) * Expr::variable("q1") - (Expr::variable("q1") - Expr(1.0 / 3.0));
  const Expr back = parse(to_string(e), vars);
  CHECK(bit_equal(eval(e, {{"q1", 0.7}}), eval(back, {{"q1", 0.7}})));
  const Expr p = pow(-Expr::variable("q1"), 2);
  CHECK(eval(parse(to_string(p), vars), {{"q1", 3.0}}) == 9.0);
}

TEST_CASE("compiled evaluation matches eval bit for bit") {
  ExprGenerator gen({"q1", "q2", "v1_1"}, 9);
  const std::vector<std::string> slots{"q1", "q2", "v1_1"};
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = gen.wild(5);
    const CompiledExpr c(e, slots);
    const Eigen::VectorXd x = gen.point();
    double a = 0.0, b = 0.0;
    bool a_ok = true, b_ok = true;
    try { a = eval(e, gen.bindings(x)); } catch (const DomainError&) { a_ok = false; }
    try { b = c(std::span<const double>(x.data(), 3)); } catch (const DomainError&) { b_ok = false; }
    CHECK(a_ok == b_ok);
    if (a_ok && b_ok) CHECK(bit_equal(a, b));
  }
}

TEST_CASE("substitute and simplification identities") {
  const VarTable vars(2, 1);
  const Expr e = parse("q1*q2 + 0*v1_1 + 1*q1", vars);
  CHECK(free_variables(e) == std::set<std::string>{"q1", "q2"});
  const Expr s = substitute(e, {{"q1", parse("q2 + 1", vars)}});
  CHECK(eval(s, {{"q2", 2.0}}) == 9.0);
  CHECK(parse("q1 - q1", vars).op() != Op::Const);  // no algebra beyond constant factors
  CHECK(parse("2*3", vars).is_constant());
}

TEST_CASE("constant factors are merged") {
  const VarTable vars(2, 1);
  auto printed = [&](const char* src) { return to_string(parse(src, vars)); };
  CHECK(printed("2*q1/2") == "q1");
  CHECK(printed("q1*3*2") == "6 * q1");
  CHECK(printed("-(3*q1)") == "-3 * q1");
  CHECK(printed("-1*q1") == "-q1");
  CHECK(printed("3*(-q1)") == "-3 * q1");
  CHECK(printed("(3*q1)/4") == "0.75 * q1");
  CHECK(printed("(2*q1)/3") == "2 * q1 / 3");
  CHECK(printed("q1/3") == "q1 / 3");
  CHECK(to_string(diff(parse("v1_1^2/2", vars), "v1_1")) == "v1_1");
  CHECK(to_string(diff(parse("-(v1_1^2)/2", vars), "v1_1")) == "-v1_1");
}

TEST_CASE("concurrent evaluation is safe") {
  const VarTable vars(1, 1);
  const Expr e = parse("sin(q1)^3 + exp(v1_1)/(2 + cos(q1))", vars);
  const double expected = eval(e, {{"q1", 0.4}, {"v1_1", -0.2}});
  std::vector<std::thread> threads;
  std::vector<int> ok(8, 0);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      int good = 1;
      for (int i = 0; i < 1000; ++i) good &= bit_equal(eval(diff(e, "q1") * Expr(0.0) + e, {{"q1", 0.4}, {"v1_1", -0.2}}), expected);
      ok[static_cast<std::size_t>(t)] = good;
    });
  }
  for (auto& t : threads) t.join();
  for (int v : ok) CHECK(v == 1);
}
