#pragma once

#include "smallpar/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace smallpar {

/// A bounded planar Jordan region given by its positively oriented boundary.
///
/// The boundary is a closed curve c(u), u in [0, 1): a circle, a polygon
/// parametrized by arc length, or a user curve. Simplicity is checked on a
/// polygonal approximation at the working resolution, so it is a heuristic
/// validation and not a certificate.
class PlanarRegion {
 public:
  enum class Shape { Circle, Polygon, Curve };

  static PlanarRegion circle(Vec2 center, double radius, int resolution = 512);
  static PlanarRegion polygon(std::vector<Vec2> vertices, int resolution = 512);
  static PlanarRegion curve(std::function<Vec2(double)> c, int resolution = 512);

  PlanarRegion with_star_center(Vec2 c) const;

  Shape shape() const { return shape_; }
  int resolution() const { return resolution_; }
  const std::optional<Vec2>& star_center() const { return star_center_; }
  /// Circle: center and radius. Polygon: vertices.
  Vec2 center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }

  Vec2 point(double u) const;
  /// n points at u = i / n.
  std::vector<Vec2> sample(int n) const;

  /// Throws Error unless the boundary is simple and positively oriented at
  /// the working resolution.
  void validate() const;
  double area() const;
  Vec2 centroid() const;
  /// Interior test by the winding number of the boundary around p.
  bool contains(const Vec2& p) const;
  double distance_to_boundary(const Vec2& p) const;
  std::string describe() const;

 private:
  PlanarRegion() = default;
  std::vector<Vec2> outline() const;

  Shape shape_ = Shape::Circle;
  int resolution_ = 512;
  Vec2 center_ = Vec2::Zero();
  double radius_ = 0.0;
  std::vector<Vec2> vertices_;
  std::vector<double> cumulative_;  // polygon arc length at each vertex, normalized
  std::function<Vec2(double)> curve_;
  std::optional<Vec2> star_center_;
};

/// Cartesian product U_1 x ... x U_p of planar regions, dimension 2p.
struct ProductRegion {
  std::vector<PlanarRegion> factors;

  ProductRegion() = default;
  explicit ProductRegion(std::vector<PlanarRegion> f);
  ProductRegion(PlanarRegion single);  // NOLINT(google-explicit-constructor)

  int dim() const { return 2 * static_cast<int>(factors.size()); }
  bool planar() const { return factors.size() == 1; }
  bool contains(const Vec& x) const;
  /// For interior points, the distance to the product's boundary.
  double distance_to_boundary(const Vec& x) const;
  /// Points on the boundary: for each factor j, n points of its boundary
  /// while the other factors alternate between their center and boundary.
  std::vector<Vec> boundary_samples(int n) const;
  /// Star centers (centroids where missing) concatenated.
  Vec center() const;
};

struct DegreeReport {
  int degree = 0;
  double min_field_norm = 0.0;
  Vec2 min_point = Vec2::Zero();
  long samples_used = 0;
  bool refined = false;
  double total_angle = 0.0;
};

struct WindingOptions {
  int initial_samples = 512;
  long max_samples = 1L << 20;
  double vanish_tol = 1e-9;
  double residue_tol = 0.1;
};

class FieldVanishes : public Error {
 public:
  FieldVanishes(const std::string& msg, Vec2 point, double norm)
      : Error(msg), point_(point), norm_(norm) {}
  const Vec2& point() const { return point_; }
  double norm() const { return norm_; }

 private:
  Vec2 point_;
  double norm_;
};

class NonConvergent : public Error {
 public:
  NonConvergent(const std::string& msg, Vec2 point) : Error(msg), point_(point) {}
  const Vec2& point() const { return point_; }

 private:
  Vec2 point_;
};

using PlanarField = std::function<Vec2(const Vec2&)>;

/// Wraps an angle difference into (-pi, pi].
double wrap_angle(double a);

/// Sum of wrapped argument increments of F along the closed sample list.
double accumulate_angle(const std::vector<Vec2>& values);

/// Winding number of F along the boundary. Segments whose argument
/// increment is at least pi/2 are bisected until every increment is below
/// pi/2; a segment narrower than 1 / max_samples in u aborts with
/// NonConvergent. Samples are evaluated in parallel.
DegreeReport winding_number(const PlanarField& f, const PlanarRegion& region,
                            const WindingOptions& opt = {});

/// Winding number of the closed polyline around p (0 when p is far outside).
int winding_around(const std::vector<Vec2>& closed, const Vec2& p);

/// Product of the factor degrees; min_field_norm is the minimum over factors.
DegreeReport product_degree(const std::vector<PlanarField>& fields, const ProductRegion& region,
                            const WindingOptions& opt = {});

/// W_delta(U): radial scaling p -> c + (1 - delta)(p - c) about the star center.
PlanarRegion contract(const PlanarRegion& region, double delta);

}  // namespace smallpar
