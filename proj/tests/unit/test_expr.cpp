#include "smallpar/expr.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

using namespace smallpar;
using namespace smallpar::expr;

namespace {

double eval_at(const std::string& src, double t, std::vector<double> x, const ParamMap& p = {}) {
  return evaluate(parse(src), t, x, p);
}

const std::vector<std::string> kSamples = {
    "sin(x1)*exp(x2)",
    "x1^3 - 2*x1*x2 + cos(t)*x2^2",
    "log(x1 + 2)/sqrt(x2 + 1)",
    "tan(0.3*x1)*abs(x2 - 3)",
    "(x1^2 + x2^2)^1.5",
    "x1^x2",
    "-x2 + x1*(1 - x1^2 - x2^2)",
    "(1 - (-x1)^2)*x2 + lambda*cos(t)",
    "exp(-x1/2)*sin(t - x2)^2",
};

}  // namespace

TEST_CASE("operator precedence and associativity") {
  CHECK(eval_at("1 + 2*3", 0, {}) == 7);
  CHECK(eval_at("2^3^2", 0, {}) == 512);
  CHECK(eval_at("-2^2", 0, {}) == -4);
  CHECK(eval_at("2^-1", 0, {}) == 0.5);
  CHECK(eval_at("8/4/2", 0, {}) == 1);
  CHECK(eval_at("10 - 4 - 3", 0, {}) == 3);
  CHECK(eval_at("1.5e2 + .5", 0, {}) == 150.5);
  CHECK(eval_at("x1*t + x2", 2.0, {3.0, 1.0}) == 7);
  CHECK(eval_at("lambda*x1", 0, {2.0}, {{"lambda", 4.0}}) == 8);
}

TEST_CASE("parse errors carry offset and expected tokens") {
  try {
    (void)parse("sin(t");
    FAIL("no exception");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
    REQUIRE(!e.expected().empty());
    CHECK(std::find(e.expected().begin(), e.expected().end(), ")") != e.expected().end());
  }
  CHECK_THROWS_AS(parse("1 +"), ParseError);
  CHECK_THROWS_AS(parse("x1 x2"), ParseError);
  CHECK_THROWS_AS(parse("foo(1)"), ParseError);
  CHECK_THROWS_AS(parse("x0"), ParseError);
  CHECK_THROWS_AS(parse("2 * mu", std::set<std::string>{"lambda"}), ParseError);
  CHECK_NOTHROW(parse("2 * lambda", std::set<std::string>{"lambda"}));
}

TEST_CASE("domain errors name the offending subexpression") {
  try {
    (void)eval_at("1 + log(x1)", 0, {-1.0});
    FAIL("no exception");
  } catch (const EvalError& e) {
    CHECK(e.subexpression() == "log(x1)");
  }
  CHECK_THROWS_AS(eval_at("1/x1", 0, {0.0}), EvalError);
  CHECK_THROWS_AS(eval_at("sqrt(x1 - 1)", 0, {0.0}), EvalError);
  CHECK_THROWS_AS(eval_at("exp(x1)", 0, {1000.0}), EvalError);
  const Compiled c(parse("log(x1)"), {});
  const std::array<double, 1> x{-2.0};
  CHECK_THROWS_AS(c(0.0, x.data()), EvalError);
}

TEST_CASE("print/parse round trip") {
  for (const auto& src : kSamples) {
    CAPTURE(src);
    const Expr e = parse(src);
    const std::string printed = print(e);
    const Expr again = parse(printed);
    CHECK(print(again) == printed);
    const std::vector<double> x{0.7, 1.3};
    const ParamMap p{{"lambda", 0.4}};
    CHECK(evaluate(again, 0.9, x, p) == evaluate(e, 0.9, x, p));
  }
  // Printed derivatives, including sign() from abs, parse back.
  const Expr d = differentiate(parse("abs(x1)*x2"), Variable::state(0));
  CHECK(print(parse(print(d))) == print(d));
}

TEST_CASE("compiled evaluation matches the tree walker") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const ParamMap p{{"lambda", 1.25}};
  for (const auto& src : kSamples) {
    const Expr e = parse(src);
    const Compiled c(e, p);
    for (int i = 0; i < 20; ++i) {
      const std::array<double, 2> x{u(rng), u(rng)};
      const double t = 6 * u(rng);
      CHECK(c(t, x.data()) == doctest::Approx(evaluate(e, t, x, p)).epsilon(1e-15));
    }
  }
}

TEST_CASE("symbolic derivatives agree with central differences at 500 samples") {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.5, 1.5), ut(0.0, kTwoPi);
  const ParamMap p{{"lambda", 0.8}};
  const double h = 1e-6;
  int checked = 0;
  for (int sample = 0; sample < 500; ++sample) {
    const Expr e = parse(kSamples[static_cast<std::size_t>(sample) % kSamples.size()]);
    std::vector<double> x{u(rng), u(rng)};
    const double t = ut(rng);
    for (int j = 0; j < 3; ++j) {
      const Variable v = j < 2 ? Variable::state(j) : Variable::time();
      const double exact = evaluate(differentiate(e, v), t, x, p);
      auto at = [&](double delta) {
        std::vector<double> y = x;
        double tt = t;
        (j < 2 ? y[static_cast<std::size_t>(j)] : tt) += delta;
        return evaluate(e, tt, y, p);
      };
      const double fd = (at(h) - at(-h)) / (2 * h);
      CHECK(std::abs(exact - fd) <= 1e-6 * (1 + std::abs(exact)));
      ++checked;
    }
  }
  CHECK(checked == 1500);
}

TEST_CASE("derivative simplifications") {
  CHECK(print(differentiate(parse("3*x1 + 2"), Variable::state(0))) == "3");
  CHECK(print(differentiate(parse("x2"), Variable::state(0))) == "0");
  CHECK(print(differentiate(parse("-x2"), Variable::state(0))) == "0");
  CHECK(print(differentiate(parse("x1^1"), Variable::state(0))) == "1");
  CHECK(print(differentiate(parse("lambda*t"), Variable::param("lambda"))) == "t");
  const Expr sgn = differentiate(parse("abs(x1)"), Variable::state(0));
  CHECK(evaluate(sgn, 0, std::vector<double>{0.0}) == 0.0);
  CHECK(evaluate(sgn, 0, std::vector<double>{-3.0}) == -1.0);
}

TEST_CASE("expression metadata") {
  const Expr e = parse("x3*sin(t) + lambda");
  CHECK(e.state_dimension() == 3);
  CHECK(e.depends_on_time());
  CHECK(e.parameters() == std::set<std::string>{"lambda"});
  CHECK_FALSE(parse("x1 + 1").depends_on_time());
}

TEST_CASE("vector expressions") {
  const VectorExpr v = VectorExpr::parse({"x1*x2", "lambda*x1"}, {{"lambda", 2.0}});
  CHECK(v.size() == 2);
  const CompiledVector c(v, 2);
  Vec x(2), out(2);
  x << 3.0, 4.0;
  c.eval(0.0, x, out);
  CHECK(out[0] == 12.0);
  CHECK(out[1] == 6.0);
  Mat j(2, 2);
  c.jacobian(0.0, x, j);
  CHECK(j(0, 0) == 4.0);
  CHECK(j(0, 1) == 3.0);
  CHECK(j(1, 0) == 2.0);
  CHECK(j(1, 1) == 0.0);
  CHECK_THROWS_AS(VectorExpr::parse({"x1*mu"}, {{"lambda", 1.0}}), Error);
  CHECK_THROWS_AS(VectorExpr::parse({"x3"}).validate(2), Error);
}
