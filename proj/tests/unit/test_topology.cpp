#include "smallpar/topology.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace smallpar;

namespace {

using C = std::complex<double>;

PlanarField complex_map(std::function<C(C)> f) {
  return [f](const Vec2& p) {
    const C w = f(C(p.x(), p.y()));
    return Vec2(w.real(), w.imag());
  };
}

const PlanarRegion disk = PlanarRegion::circle(Vec2::Zero(), 1.0, 256);

}  // namespace

TEST_CASE("degree axioms on the unit disk") {
  CHECK(winding_number([](const Vec2& p) { return p; }, disk).degree == 1);
  CHECK(winding_number([](const Vec2&) { return Vec2(0.3, -2.0); }, disk).degree == 0);
  CHECK(winding_number(complex_map([](C z) { return z * z; }), disk).degree == 2);
  CHECK(winding_number(complex_map([](C z) { return std::conj(z); }), disk).degree == -1);
  CHECK(winding_number(complex_map([](C z) { return z * z * z - 0.1; }), disk).degree == 3);
  // Zero outside the region.
  CHECK(winding_number(complex_map([](C z) { return z - C(1.5, 0.2); }), disk).degree == 0);
}

TEST_CASE("re-parametrization invariance") {
  const PlanarField f = complex_map([](C z) { return z * z * z + C(0.2, 0.1); });
  const int on_disk = winding_number(f, disk).degree;
  const PlanarRegion square = PlanarRegion::polygon(
      {Vec2(-1.2, -1.2), Vec2(1.2, -1.2), Vec2(1.2, 1.2), Vec2(-1.2, 1.2)}, 300);
  const PlanarRegion blob = PlanarRegion::curve(
      [](double u) {
        const double a = kTwoPi * u;
        const double r = 1.0 + 0.3 * std::cos(3 * a);
        return Vec2(r * std::cos(a), r * std::sin(a));
      },
      400);
  // Same curve traversed with a nonuniform speed.
  const PlanarRegion warped = PlanarRegion::curve(
      [](double u) {
        const double a = kTwoPi * (u + 0.1 * std::sin(kTwoPi * u) / kTwoPi);
        return Vec2(std::cos(a), std::sin(a));
      },
      256);
  CHECK(on_disk == 3);
  CHECK(winding_number(f, square).degree == on_disk);
  CHECK(winding_number(f, blob).degree == on_disk);
  CHECK(winding_number(f, warped).degree == on_disk);
}

TEST_CASE("orientation is enforced") {
  CHECK_THROWS_AS(PlanarRegion::polygon({Vec2(0, 0), Vec2(0, 1), Vec2(1, 1), Vec2(1, 0)}), Error);
  CHECK_THROWS_AS(PlanarRegion::polygon({Vec2(0, 0), Vec2(1, 1), Vec2(1, 0), Vec2(0, 1)}), Error);
  CHECK_THROWS_AS(PlanarRegion::circle(Vec2::Zero(), -1.0), Error);
}

TEST_CASE("region geometry") {
  const PlanarRegion sq = PlanarRegion::polygon({Vec2(0, 0), Vec2(2, 0), Vec2(2, 2), Vec2(0, 2)});
  CHECK(sq.area() == doctest::Approx(4.0));
  CHECK((sq.centroid() - Vec2(1, 1)).norm() < 1e-12);
  CHECK(sq.contains(Vec2(1.0, 0.5)));
  CHECK_FALSE(sq.contains(Vec2(2.5, 0.5)));
  CHECK(sq.distance_to_boundary(Vec2(1.0, 0.5)) == doctest::Approx(0.5));
  CHECK((sq.point(0.125) - Vec2(1, 0)).norm() < 1e-12);
  CHECK(disk.area() == doctest::Approx(kPi).epsilon(1e-3));
  CHECK(disk.distance_to_boundary(Vec2(0.25, 0.0)) == doctest::Approx(0.75).epsilon(1e-3));
  CHECK_THROWS_AS(sq.with_star_center(Vec2(3, 3)), Error);
}

TEST_CASE("contraction about the star center") {
  const PlanarRegion inner = contract(disk.with_star_center(Vec2::Zero()), 0.5);
  CHECK(inner.point(0.0).norm() == doctest::Approx(0.5));
  CHECK(inner.contains(Vec2(0.4, 0.0)));
  CHECK_FALSE(inner.contains(Vec2(0.6, 0.0)));
  const PlanarRegion outer = contract(disk.with_star_center(Vec2::Zero()), -0.5);
  CHECK(outer.point(0.25).norm() == doctest::Approx(1.5));
  CHECK_THROWS_AS(contract(disk, 1.0), Error);
  // The degree of a field without zeros in the annulus does not depend on delta.
  const PlanarField f = complex_map([](C z) { return z * z; });
  CHECK(winding_number(f, inner).degree == winding_number(f, outer).degree);
}

TEST_CASE("product degree multiplies factor degrees") {
  const ProductRegion pr({disk, disk});
  const PlanarField id = [](const Vec2& p) { return p; };
  const PlanarField sq = complex_map([](C z) { return z * z; });
  const PlanarField cj = complex_map([](C z) { return std::conj(z); });
  CHECK(product_degree({id, id}, pr).degree == 1);
  CHECK(product_degree({sq, cj}, pr).degree == -2);
  CHECK(pr.dim() == 4);
  Vec inside(4);
  inside << 0.1, 0.1, -0.2, 0.3;
  CHECK(pr.contains(inside));
  CHECK(pr.distance_to_boundary(inside) == doctest::Approx(1.0 - std::hypot(0.2, 0.3)).epsilon(1e-3));
  for (const Vec& b : pr.boundary_samples(16)) CHECK(pr.distance_to_boundary(b) < 1e-9);
}

TEST_CASE("vanishing fields and the refinement cap") {
  // z - 1 vanishes at the boundary point (1, 0).
  CHECK_THROWS_AS(winding_number(complex_map([](C z) { return z - 1.0; }), disk), FieldVanishes);

  // A zero at distance 1e-4 inside the boundary forces bisection: a generous
  // cap resolves it, and each halving of the cap eventually aborts.
  const PlanarField near = complex_map([](C z) { return z - C(1.0 - 1e-4, 0.0); });
  WindingOptions opt;
  opt.initial_samples = 64;
  const DegreeReport ok = winding_number(near, disk, opt);
  CHECK(ok.degree == 1);
  CHECK(ok.refined);
  CHECK(ok.samples_used > 64);
  opt.max_samples = 128;
  CHECK_THROWS_AS(winding_number(near, disk, opt), NonConvergent);
  // Doubling the initial sampling leaves the answer unchanged.
  WindingOptions doubled;
  doubled.initial_samples = 128;
  CHECK(winding_number(near, disk, doubled).degree == ok.degree);
}

TEST_CASE("angle helpers") {
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  std::vector<Vec2> square{Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0), Vec2(0, -1)};
  CHECK(accumulate_angle(square) == doctest::Approx(kTwoPi));
  CHECK(winding_around(square, Vec2::Zero()) == 1);
  CHECK(winding_around(square, Vec2(5, 5)) == 0);
}
