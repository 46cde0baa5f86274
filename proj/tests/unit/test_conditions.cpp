#include "smallpar/conditions.hpp"

#include "systems.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
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

const PlanarRegion unit_disk = PlanarRegion::circle(Vec2::Zero(), 1.0, 256).with_star_center(Vec2::Zero());

// psi = 0 on the plane with a given phi.
SystemDef drift(VecField phi) {
  return make_callable_system("drift", 2, kTwoPi, std::move(phi),
                              [](double, const Vec&, Vec& out) { out = Vec::Zero(2); }, {},
                              [](double, const Vec&, Mat& out) { out = Mat::Zero(2, 2); });
}

}  // namespace

TEST_CASE("A0 on E1: the unit circle is periodic, a smaller circle is not") {
  const SystemDef sys = e1();
  const HypothesisReport ok = check_A0(sys, unit_disk, 64);
  CHECK(ok.verdict == Verdict::Holds);
  CHECK(ok.summary.rfind("A0 holds (max residual", 0) == 0);
  CHECK(ok.table.rows.size() == 64);

  const HypothesisReport bad = check_A0(sys, PlanarRegion::circle(Vec2::Zero(), 0.5, 64), 64);
  CHECK(bad.verdict == Verdict::Fails);
  REQUIRE(bad.witness.has_value());
  CHECK(bad.witness->point.norm() == doctest::Approx(0.5));
}

TEST_CASE("A1 with psi = 0 reduces to the mean of phi on the boundary") {
  const std::vector<double> s{0.0, 2.0, 4.0};
  const SystemDef radial = drift([](double t, const Vec& x, Vec& out) {
    out = x + std::cos(t) * Vec::Ones(2);
  });
  const HypothesisReport rep = check_A1(radial, unit_disk, s, 32);
  CHECK(rep.verdict == Verdict::Holds);
  CHECK(rep.margin == doctest::Approx(kTwoPi).epsilon(1e-8));

  const SystemDef mean_free = drift([](double t, const Vec&, Vec& out) {
    out = std::sin(t) * Vec::Ones(2);
  });
  CHECK(check_A1(mean_free, unit_disk, s, 32).verdict == Verdict::Fails);
}

TEST_CASE("A2 with psi = 0 and phi = xi has degree 1") {
  const SystemDef sys = drift([](double, const Vec& x, Vec& out) { out = x; });
  const A2Result r = check_A2(sys, unit_disk, 64);
  CHECK(r.report.verdict == Verdict::Holds);
  REQUIRE(r.degree.has_value());
  CHECK(r.degree->degree == 1);
  CHECK(r.degree_refined->degree == 1);
}

TEST_CASE("Melnikov integral on E1 matches an adaptive quadrature of the closed form") {
  const SystemDef sys = e1();
  const Trajectory cycle = unperturbed_cycle(sys, point(1, 0));
  // Along x0(t) = (cos t, sin t): <phi, perp psi> = -cos t and div psi = -2.
  auto integrand = [](double t) { return -std::exp(2 * t) * std::cos(t); };
  const double oracle =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, kTwoPi, 15, 1e-14);
  CHECK(oracle == doctest::Approx(melnikov_e1_closed_form()).epsilon(1e-12));

  const auto thetas = uniform_grid(0.0, kTwoPi, 65);
  const MelnikovProfile prof = melnikov_profile(sys, cycle, thetas);
  for (double m : prof.values) CHECK(std::abs(m - oracle) <= 1e-6 * std::abs(oracle));
  CHECK((prof.max_abs - prof.min_abs) <= 1e-8 * prof.max_abs);
  CHECK(prof.weight_min >= 1.0);
  CHECK(prof.weight_max == doctest::Approx(std::exp(2 * prof.nodes.back())).epsilon(1e-6));
  CHECK(prof.weight_max < std::exp(4 * kPi));
  const HypothesisReport rep = check_A3_1(prof);
  CHECK(rep.verdict == Verdict::Holds);
  CHECK(rep.table.rows.size() == 65);
}

TEST_CASE("Melnikov integral is T-periodic and linear in phi") {
  const SystemDef base = e1();
  const Trajectory cycle = unperturbed_cycle(base, point(1, 0));
  auto p1 = [](double t, const Vec& x, Vec& out) {
    out.resize(2);
    out << std::cos(t), x[0] * std::sin(t);
  };
  auto p2 = [](double t, const Vec& x, Vec& out) {
    out.resize(2);
    out << x[1], std::cos(2 * t);
  };
  auto mix = [&](double t, const Vec& x, Vec& out) {
    Vec a, b;
    p1(t, x, a);
    p2(t, x, b);
    out = a + 2.0 * b;
  };
  const std::vector<double> th{0.3, 0.3 + kTwoPi, 2.0, 2.0 - kTwoPi};
  const auto m1 = melnikov_profile(base.with_phi(p1), cycle, th).values;
  const auto m2 = melnikov_profile(base.with_phi(p2), cycle, th).values;
  const auto mm = melnikov_profile(base.with_phi(mix), cycle, th).values;
  const double scale = std::abs(m1[0]) + std::abs(m2[0]) + 1.0;
  CHECK(std::abs(m1[0] - m1[1]) <= 1e-9 * scale);
  CHECK(std::abs(m1[2] - m1[3]) <= 1e-9 * scale);
  for (std::size_t i = 0; i < th.size(); ++i) CHECK(std::abs(mm[i] - (m1[i] + 2 * m2[i])) <= 1e-9 * scale);
  // A time-dependent phi gives a theta-dependent profile.
  CHECK(std::abs(m1[0] - m1[2]) > 1e-3 * scale);
}

TEST_CASE("divergence-free psi gives weight 1") {
  const SystemDef sys = e2();
  const Trajectory cycle = unperturbed_cycle(sys, point(2, 0));
  const MelnikovProfile prof = melnikov_profile(sys, cycle, std::vector<double>{0.0, 1.0});
  CHECK(prof.weight_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(prof.weight_max == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("A3: E1 holds, a rotation fails because 1 is a double multiplier") {
  const std::vector<double> th{0.0, 2.0};
  const SystemDef sys = e1();
  const HypothesisReport a = check_A3(sys, unperturbed_cycle(sys, point(1, 0)), th);
  CHECK(a.verdict == Verdict::Holds);
  const SystemDef rot = e2();
  const HypothesisReport b = check_A3(rot, unperturbed_cycle(rot, point(1, 0)), th);
  CHECK(b.verdict == Verdict::Fails);
}

TEST_CASE("defect projection on the E1 cycle normal") {
  // q = <y, perp f> obeys q' = div(psi) q + f ^ phi along the cycle, so with
  // div = -2 and f ^ phi = -cos(t + theta):
  //   q(T) = -int_0^T exp(-2 (T - t)) cos(t + theta) dt.
  const SystemDef sys = e1();
  const Trajectory cycle = unperturbed_cycle(sys, point(1, 0));
  const std::vector<double> th{0.0, 1.0, 2.0};
  const auto proj = defect_normal_projection(sys, cycle, 0.0, th);
  for (std::size_t i = 0; i < th.size(); ++i) {
    auto integrand = [&](double t) { return -std::exp(-2 * (kTwoPi - t)) * std::cos(t + th[i]); };
    const double oracle =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, kTwoPi, 15, 1e-14);
    CHECK(proj[i] == doctest::Approx(oracle).epsilon(1e-7));
  }
}

TEST_CASE("homotopy comparison of two perturbations") {
  const auto lambdas = uniform_grid(0.0, 1.0, 11);
  const std::vector<double> s{0.0, kPi};
  SUBCASE("nearby fields share the degree") {
    const SystemDef a = drift([](double t, const Vec& x, Vec& out) {
      out = x + 0.1 * Vec::Ones(2) + std::cos(t) * Vec::Ones(2);
    });
    const SystemDef b = drift([](double, const Vec& x, Vec& out) {
      out.resize(2);
      out << 1.1 * x[0] - 0.1 * x[1], 0.9 * x[1] - 0.05;
    });
    const Theorem2Report r = theorem2_compare(a, b, unit_disk, lambdas, s, 64);
    CHECK(r.report.verdict == Verdict::Holds);
    CHECK(r.degree1 == 1);
    CHECK(r.degree2 == 1);
  }
  SUBCASE("a constant field against -id vanishes on the boundary at lambda = 1/2") {
    const SystemDef a = drift([](double, const Vec&, Vec& out) { out = Vec::Unit(2, 0); });
    const SystemDef b = drift([](double, const Vec& x, Vec& out) { out = -x; });
    const Theorem2Report r = theorem2_compare(a, b, unit_disk, lambdas, s, 64);
    CHECK(r.report.verdict == Verdict::Inconclusive);
    REQUIRE(r.report.witness.has_value());
    CHECK(r.report.witness->parameter == doctest::Approx(0.5));
    CHECK((r.report.witness->point - Vec2(1, 0)).norm() < 1e-9);
  }
}

TEST_CASE("resonance map of the forced van der Pol term") {
  const expr::Expr f = expr::parse(kE2Forcing);
  const expr::ParamMap params{{"lambda", 1.0}};
  const ResonanceMap map = resonance_H(f, params);
  const double a0 = resonance_amplitude_oracle();
  CHECK(a0 == doctest::Approx(2.3829757679).epsilon(1e-9));
  const auto it = std::find_if(map.zeros.begin(), map.zeros.end(),
                               [](const ResonanceZero& z) { return std::abs(z.theta - kPi / 2) < 1e-3; });
  REQUIRE(it != map.zeros.end());
  CHECK(std::abs(it->theta - kPi / 2) <= 1e-6);
  CHECK(std::abs(it->a - a0) <= 1e-6);
  const double det_oracle = -kPi * kPi * (3 * a0 * a0 / 4 - 1);
  CHECK(std::abs(it->det - det_oracle) <= 1e-4);
  const int deg = winding_number([&map](const Vec2& p) { return map(p.x(), p.y()); },
                                 resonance_box(it->a, it->theta, 0.2))
                      .degree;
  CHECK(deg == (it->det > 0 ? 1 : -1));

  SUBCASE("the E2 period defect factors as R(theta) H(a, theta)") {
    const SystemDef sys = e2();
    for (const auto& [a, th] : std::vector<std::pair<double, double>>{{2.0, 0.4}, {1.0, 2.5}, {a0, kPi / 2}}) {
      const Vec2 xi = resonance_xi(a, th);
      const Vec d = DefectProfile(sys, Vec(xi))(0.0);
      Eigen::Matrix2d r;
      r << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
      const Vec2 rh = r * map(a, th);
      CHECK((Vec2(d) - rh).norm() <= 1e-7 * (1 + rh.norm()));
    }
  }
  SUBCASE("xi reverses orientation: deg(defect, xi(V)) = -deg(H, V)") {
    const A2Result r = check_A2(e2(), resonance_image_region(it->a, it->theta, 0.2), 256);
    REQUIRE(r.degree.has_value());
    CHECK(r.degree->degree == -deg);
  }
}

TEST_CASE("a forcing without x dependence has no zeros") {
  const ResonanceMap map = resonance_H(expr::parse("0"), {});
  CHECK(map.degenerate);
  CHECK(map.zeros.empty());
}
