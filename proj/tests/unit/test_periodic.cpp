#include "smallpar/periodic.hpp"
#include "smallpar/variational.hpp"

#include "systems.hpp"

#include <doctest.h>

#include <cmath>

using namespace smallpar;
using namespace smallpar::testing;

namespace {

Vec point(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("scalar equation with one attracting periodic state") {
  // x' = 1/2 - x has the unique periodic solution x = 1/2.
  const SystemDef sys = make_expr_system("relax", kTwoPi, expr::VectorExpr::parse({"0"}),
                                         expr::VectorExpr::parse({"0.5 - x1"}));
  const PeriodicOrbitResult r = shoot(sys, 0.0, Vec::Constant(1, 3.0));
  CHECK(r.converged);
  CHECK_FALSE(r.singular);
  CHECK(r.xi[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.residual <= 1e-9);
  REQUIRE(r.multipliers.size() == 1);
  CHECK(r.multipliers[0].real() == doctest::Approx(std::exp(-kTwoPi)).epsilon(1e-8));
}

TEST_CASE("E3 periodic response") {
  // eps (-x + cos t): x = eps (eps cos t + sin t) / (1 + eps^2) at t = 0.
  const double eps = 0.01;
  const PeriodicOrbitResult r = shoot(e3(), eps, Vec::Zero(1));
  CHECK(r.converged);
  CHECK(r.xi[0] == doctest::Approx(eps * eps / (1 + eps * eps)).epsilon(1e-7));
}

TEST_CASE("E1 at eps = 0: every circle point is fixed and the Jacobian is singular") {
  const SystemDef sys = e1();
  for (int i = 0; i < 32; ++i) {
    const double a = kTwoPi * i / 32;
    const Vec p = point(std::cos(a), std::sin(a));
    CHECK((period_map(sys, 0.0, p).first - p).norm() < 1e-8);
  }
  const PeriodicOrbitResult r = shoot(sys, 0.0, point(1, 0));
  CHECK(r.converged);
  CHECK(r.singular);
}

TEST_CASE("period map Jacobian matches finite differences") {
  const SystemDef sys = e2(0.5);
  const Vec xi = point(0.3, 1.2);
  const auto [p, j] = period_map(sys, 0.05, xi);
  const double h = 1e-6;
  for (int c = 0; c < 2; ++c) {
    Vec d = Vec::Zero(2);
    d[c] = h;
    const Vec fd = (period_map(sys, 0.05, xi + d).first - period_map(sys, 0.05, xi - d).first) / (2 * h);
    CHECK((fd - j.col(c)).norm() < 1e-6);
  }
  const auto [q, ji] = period_map(sys, 0.05, p, {}, true);
  CHECK((q - xi).norm() < 1e-8);
  CHECK((ji * j - Mat::Identity(2, 2)).norm() < 1e-7);
}

TEST_CASE("E2 at eps = 1e-3 has an orbit of amplitude close to the resonance zero") {
  const double a0 = resonance_amplitude_oracle();
  const PeriodicOrbitResult r = shoot(e2(), 1e-3, point(0.0, a0));
  REQUIRE(r.converged);
  double amp = 0.0;
  for (double t : uniform_grid(0.0, kTwoPi, 400)) amp = std::max(amp, r.orbit(t).norm());
  CHECK(std::abs(amp - a0) < 0.05);
}

TEST_CASE("failures") {
  SUBCASE("Newton stalls and keeps its residual history") {
    ShootOptions opt;
    opt.max_iterations = 1;
    opt.reverse_fallback = false;
    try {
      (void)shoot(e1(), 1e-2, point(0.3, 0.3), opt);
      FAIL("expected NewtonStalled");
    } catch (const NewtonStalled& e) {
      CHECK_FALSE(e.residual_history().empty());
    }
  }
  SUBCASE("a constant drift has a singular period map at eps > 0") {
    const SystemDef sys = make_expr_system("drift", kTwoPi, expr::VectorExpr::parse({"1"}),
                                           expr::VectorExpr::parse({"0"}));
    CHECK_THROWS_AS(shoot(sys, 0.1, Vec::Zero(1)), SingularJacobian);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(shoot(e1(), -1.0, point(1, 0)), Error);
    CHECK_THROWS_AS(shoot(e1(), 0.1, Vec::Zero(3)), Error);
  }
}

TEST_CASE("membership in X and distances") {
  const SystemDef sys = e1();
  const Trajectory cycle = unperturbed_cycle(sys, point(1, 0));
  const MembershipReport in = membership_X(sys, cycle, PlanarRegion::circle(Vec2::Zero(), 2.0, 128), 64);
  CHECK(in.in_X);
  CHECK(in.margin == doctest::Approx(1.0).epsilon(1e-3));
  const MembershipReport out = membership_X(sys, cycle, PlanarRegion::circle(Vec2::Zero(), 0.5, 128), 64);
  CHECK_FALSE(out.in_X);
  REQUIRE(out.witness_time.has_value());
  CHECK(distance_to_curve(cycle, point(0.0, 0.5)) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(distance_to_curve(cycle, point(3.0, 0.0)) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("log-log slope") {
  std::vector<double> x{1e-3, 2e-3, 4e-3, 8e-3}, y;
  for (double v : x) y.push_back(3.0 * v * v);
  CHECK(loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::isnan(loglog_slope({1.0}, {1.0})));
  CHECK(std::isnan(loglog_slope({1.0, 2.0}, {-1.0, 0.0})));
}

TEST_CASE("sweep on a planar standard-form system") {
  // psi = 0, phi = (-x1 + cos t, -x2): x1(0) = eps^2 / (1 + eps^2), x2 = 0.
  const SystemDef sys = make_expr_system("planar-e3", kTwoPi,
                                         expr::VectorExpr::parse({"-x1 + cos(t)", "-x2"}),
                                         expr::VectorExpr::parse({"0", "0"}));
  SweepOptions opt;
  opt.strategy = SeedStrategy::Fixed;
  opt.seed = point(0.2, 0.1);
  const SweepResult r = eps_sweep(sys, PlanarRegion::circle(Vec2::Zero(), 1.0, 128), {0.1, 0.05}, opt);
  REQUIRE(r.orbits.size() == 2);
  for (const auto& o : r.orbits) {
    CHECK(o.converged);
    CHECK(o.in_X.value_or(false));
    CHECK(std::abs(o.xi[0] - o.eps * o.eps / (1 + o.eps * o.eps)) < 1e-8);
    CHECK(std::abs(o.xi[1]) < 1e-8);
  }
  CHECK(std::isnan(r.slope));
  CHECK_THROWS_AS(eps_sweep(sys, PlanarRegion::circle(Vec2::Zero(), 1.0), {0.0}, opt), Error);
}
