#include "smallpar/variational.hpp"

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

// psi = 0 with a time-dependent phi; eta(T,s,xi) - eta(0,s,xi) = int_0^T phi(t, xi) dt.
SystemDef drift_only() {
  return make_expr_system("drift", kTwoPi,
                          expr::VectorExpr::parse({"x1 + cos(t)^2", "x1*x2 - sin(t)"}),
                          expr::VectorExpr::parse({"0", "0"}));
}

}  // namespace

TEST_CASE("eta vanishes at its anchor and solves the affine system") {
  const SystemDef sys = e1();
  const std::vector<double> times{0.0, 1.0, 2.0, kTwoPi};
  const EtaSolution sol = eta(sys, 2.0, point(0.6, 0.1), times);
  CHECK(sol.y(2.0).norm() < 1e-14);
  REQUIRE(sol.values.size() == times.size());
  CHECK((sol.values[2] - sol.y(2.0)).norm() < 1e-14);
  CHECK((sol.omega(1.0) - flow_omega(sys, 1.0, 0.0, point(0.6, 0.1))).norm() < 1e-8);
}

TEST_CASE("with psi = 0 the defect is the period integral of phi for every anchor") {
  const SystemDef sys = drift_only();
  const Vec xi = point(0.5, -0.4);
  // int_0^{2pi} (x1 + cos^2 t, x1 x2 - sin t) dt
  const Vec expected = point(kTwoPi * xi[0] + kPi, kTwoPi * xi[0] * xi[1]);
  const DefectProfile prof(sys, xi);
  for (double s : {0.0, 1.0, 3.0, 5.5}) {
    CHECK((prof(s) - expected).norm() < 1e-9);
    CHECK((eta_defect_direct(sys, s, xi) - expected).norm() < 1e-9);
  }
}

TEST_CASE("eta is affine in phi") {
  const SystemDef base = e1();
  auto phi_a = [](double t, const Vec& x, Vec& out) {
    out.resize(2);
    out << std::cos(t) * x[0], 1.0;
  };
  auto phi_b = [](double t, const Vec& x, Vec& out) {
    out.resize(2);
    out << x[1] * x[1], std::sin(2 * t);
  };
  auto phi_mix = [&](double t, const Vec& x, Vec& out) {
    Vec a, b;
    phi_a(t, x, a);
    phi_b(t, x, b);
    out = 0.3 * a - 1.7 * b;
  };
  const Vec xi = point(0.4, 0.7);
  for (double s : {0.0, 2.0}) {
    const Vec da = DefectProfile(base.with_phi(phi_a), xi)(s);
    const Vec db = DefectProfile(base.with_phi(phi_b), xi)(s);
    const Vec dm = DefectProfile(base.with_phi(phi_mix), xi)(s);
    CHECK((dm - (0.3 * da - 1.7 * db)).norm() <= 1e-9 * (1 + dm.norm()));
  }
}

TEST_CASE("fast and direct defect routes agree for anchors in the first half period") {
  const SystemDef sys = e1();
  IntegratorConfig tight;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  for (const Vec& xi : {point(1.0, 0.0), point(0.3, -0.5)}) {
    const DefectProfile prof(sys, xi, tight);
    for (double s : {0.0, 1.0, 2.0, 3.0}) {
      const Vec fast = prof(s);
      const Vec direct = eta_defect_direct(sys, s, xi, tight);
      CAPTURE(s);
      CHECK((fast - direct).norm() <= 1e-7 * (1 + fast.norm()));
    }
  }
}

TEST_CASE("defect field caches and matches the profile") {
  const SystemDef sys = e1();
  const auto field = eta_defect_field(sys, 1.5);
  const Vec xi = point(0.2, 0.2);
  const Vec a = field(xi);
  CHECK((a - field(xi)).norm() == 0.0);
  CHECK((a - DefectProfile(sys, xi)(1.5)).norm() < 1e-12);
}

TEST_CASE("Liouville identity for a periodic linear system") {
  const LinearCoefficient a = [](double t, Mat& m) {
    m.resize(3, 3);
    m << std::sin(t), 1.0, 0.0,
         -1.0, 0.2 * std::cos(t), 0.5,
         0.3, 0.0, -0.4 + std::cos(2 * t);
  };
  const MonodromyReport rep = monodromy(a, 3, kTwoPi);
  // trace integrates to -0.4 * 2 pi
  CHECK(rep.trace_integral == doctest::Approx(-0.4 * kTwoPi).epsilon(1e-10));
  CHECK(rep.liouville_error < 1e-9);
  CHECK(rep.determinant == doctest::Approx(std::exp(-0.4 * kTwoPi)).epsilon(1e-8));
  CHECK(rep.multipliers.size() == 3);
  for (std::size_t i = 1; i < rep.multipliers.size(); ++i)
    CHECK(std::abs(rep.multipliers[i - 1]) >= std::abs(rep.multipliers[i]));
}

TEST_CASE("E1 cycle multipliers are 1 and exp(-4 pi) at every phase") {
  const SystemDef sys = e1();
  const Trajectory cycle = unperturbed_cycle(sys, point(1.0, 0.0));
  const std::vector<double> thetas{0.0, 1.0, 3.5};
  const auto reports = floquet_condition_A3(sys, cycle, thetas);
  for (const auto& r : reports) {
    CAPTURE(r.theta);
    CHECK(std::abs(r.monodromy.multipliers[0] - 1.0) < 1e-6);
    CHECK(std::abs(r.monodromy.multipliers[1] - std::exp(-4 * kPi)) < 1e-7);
    CHECK(r.one_is_multiplier);
    CHECK(r.simple);
    CHECK(r.monodromy.liouville_error < 1e-6);
  }
  // Phase-shift invariance of the spectrum.
  CHECK(std::abs(reports[0].monodromy.multipliers[1] - reports[2].monodromy.multipliers[1]) < 1e-9);
}

TEST_CASE("psi = 0 has the double multiplier 1, which is not simple") {
  const LinearCoefficient zero = [](double, Mat& m) { m = Mat::Zero(2, 2); };
  const MonodromyReport rep = monodromy(zero, 2, kTwoPi);
  REQUIRE(rep.multipliers.size() == 2);
  CHECK(std::abs(rep.multipliers[0] - 1.0) < 1e-12);
  CHECK(std::abs(rep.multipliers[1] - 1.0) < 1e-12);
  CHECK_FALSE(rep.simple[0]);
  CHECK_FALSE(rep.simple[1]);
}

TEST_CASE("unperturbed_cycle rejects a non-periodic start") {
  CHECK_THROWS_AS(unperturbed_cycle(e1(), point(0.5, 0.0)), NonPeriodicCycle);
  const Trajectory c = unperturbed_cycle(e1(), point(1.0, 0.0));
  CHECK((periodic_eval(c, kTwoPi + 1.0) - c(1.0)).norm() < 1e-8);
  CHECK((periodic_eval(c, -1.0) - c(kTwoPi - 1.0)).norm() < 1e-8);
}
