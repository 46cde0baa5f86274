#include "smallpar/system.hpp"

#include "systems.hpp"

#include <doctest.h>

#include <cmath>

using namespace smallpar;
using smallpar::testing::e1;

namespace {

Vec point(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("the unit circle is a 2 pi periodic orbit of the unperturbed E1 flow") {
  const SystemDef sys = e1();
  CHECK((flow_omega(sys, kTwoPi, 0.0, point(1, 0)) - point(1, 0)).norm() < 1e-8);
  // x0(t) = (cos t, sin t) at intermediate times.
  for (double t : {0.5, 2.0, 4.5})
    CHECK((flow_omega(sys, t, 0.0, point(1, 0)) - point(std::cos(t), std::sin(t))).norm() < 1e-8);
}

TEST_CASE("flow invariants") {
  const SystemDef sys = smallpar::testing::e2(0.7);
  const SystemDef forced = sys.with_phi([](double t, const Vec& x, Vec& out) {
    out.resize(2);
    out << std::sin(t) * x[1], std::cos(2 * t);
  });
  const Vec xi = point(0.3, -0.8);

  SUBCASE("semigroup") {
    const Vec mid = flow_omega(sys, 1.1, 0.2, xi);
    CHECK((flow_omega(sys, 3.4, 1.1, mid) - flow_omega(sys, 3.4, 0.2, xi)).norm() < 1e-8);
  }
  SUBCASE("back and forth") {
    const Vec there = flow_omega(e1(), 4.0, 0.5, xi);
    CHECK((flow_omega(e1(), 0.5, 4.0, there) - xi).norm() < 1e-8);
  }
  SUBCASE("full field with eps is T-periodic in the initial time") {
    const Rhs f = full_field(forced, 0.3);
    const Vec a = integrate(f, 0.4, 2.0, xi).back();
    const Vec b = integrate(f, 0.4 + kTwoPi, 2.0 + kTwoPi, xi).back();
    CHECK((a - b).norm() < 1e-8);
  }
  SUBCASE("tightening the tolerances moves the result by less than the tolerance scale") {
    IntegratorConfig cfg;
    const Vec base = flow_omega(e1(), 5.0, 0.0, xi, cfg);
    const Vec tight = flow_omega(e1(), 5.0, 0.0, xi, cfg.tightened(100));
    CHECK((base - tight).norm() < 1e-7);
  }
  SUBCASE("dense variant agrees with the endpoint") {
    const Trajectory tr = flow_omega_dense(sys, 3.0, 0.0, xi);
    CHECK((tr(3.0) - flow_omega(sys, 3.0, 0.0, xi)).norm() < 1e-12);
  }
}

TEST_CASE("E1 divergence") {
  const SystemDef sys = e1();
  REQUIRE(sys.symbolic.has_value());
  for (double th : {0.0, 1.0, 2.5, 4.0}) {
    const Vec x = point(std::cos(th), std::sin(th));
    CHECK(sys.psi_div(0.0, x) == doctest::Approx(-2.0).epsilon(1e-14));
  }
  const Vec x = point(0.3, 0.4);
  const double r2 = 0.25;
  const double expected = 2 * (1 - r2) - 2 * r2;
  CHECK(sys.psi_div(0.0, x) == doctest::Approx(expected).epsilon(1e-14));
  const std::vector<double> xs{0.3, 0.4};
  CHECK(expr::evaluate(sys.symbolic->psi_divergence, 0.0, xs) == doctest::Approx(expected));
  CHECK(sys.autonomous_psi);
}

TEST_CASE("exact and finite-difference Jacobians agree") {
  const SystemDef exact = e1();
  const SystemDef opaque = make_callable_system("e1-callable", 2, kTwoPi, exact.phi, exact.psi);
  CHECK(opaque.finite_difference_jacobians);
  CHECK_FALSE(exact.finite_difference_jacobians);
  for (const Vec& x : {point(0.2, 0.9), point(-1.3, 0.4)})
    CHECK((exact.eval_psi_jac(0.0, x) - opaque.eval_psi_jac(0.0, x)).norm() < 1e-8);
}

TEST_CASE("system construction errors") {
  CHECK_THROWS_AS(make_expr_system("bad", kTwoPi, expr::VectorExpr::parse({"1"}),
                                   expr::VectorExpr::parse({"x1", "x2"})),
                  Error);
  CHECK_THROWS_AS(make_expr_system("bad", kTwoPi, expr::VectorExpr::parse({"x3", "0"}),
                                   expr::VectorExpr::parse({"x1", "x2"})),
                  Error);
  CHECK_THROWS_AS(make_expr_system("bad", -1.0, expr::VectorExpr::parse({"0"}),
                                   expr::VectorExpr::parse({"0"})),
                  Error);
}
