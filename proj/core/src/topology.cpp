#include "smallpar/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace smallpar {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double u = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + u * ab - p).norm();
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

double shoelace(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * a;
}

}  // namespace

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

PlanarRegion PlanarRegion::circle(Vec2 center, double radius, int resolution) {
  if (!(radius > 0) || !center.allFinite())
    throw Error("circle region: radius must be positive and center finite");
  if (resolution < 16) throw Error("circle region: resolution must be at least 16");
  PlanarRegion r;
  r.shape_ = Shape::Circle;
  r.center_ = center;
  r.radius_ = radius;
  r.resolution_ = resolution;
  r.star_center_ = center;
  return r;
}

PlanarRegion PlanarRegion::polygon(std::vector<Vec2> vertices, int resolution) {
  if (vertices.size() < 3) throw Error("polygon region: at least 3 vertices required");
  PlanarRegion r;
  r.shape_ = Shape::Polygon;
  r.vertices_ = std::move(vertices);
  r.resolution_ = std::max<int>(resolution, static_cast<int>(r.vertices_.size()));
  double total = 0.0;
  r.cumulative_.push_back(0.0);
  for (std::size_t i = 0; i < r.vertices_.size(); ++i) {
    total += (r.vertices_[(i + 1) % r.vertices_.size()] - r.vertices_[i]).norm();
    r.cumulative_.push_back(total);
  }
  if (!(total > 0)) throw Error("polygon region: degenerate boundary");
  for (double& c : r.cumulative_) c /= total;
  r.validate();
  return r;
}

PlanarRegion PlanarRegion::curve(std::function<Vec2(double)> c, int resolution) {
  if (!c) throw Error("curve region: empty parametrization");
  PlanarRegion r;
  r.shape_ = Shape::Curve;
  r.curve_ = std::move(c);
  r.resolution_ = resolution;
  r.validate();
  return r;
}

PlanarRegion PlanarRegion::with_star_center(Vec2 c) const {
  if (!contains(c)) throw Error("star center must lie inside the region");
  PlanarRegion r = *this;
  r.star_center_ = c;
  return r;
}

Vec2 PlanarRegion::point(double u) const {
  u -= std::floor(u);
  switch (shape_) {
    case Shape::Circle:
      return center_ + radius_ * Vec2(std::cos(kTwoPi * u), std::sin(kTwoPi * u));
    case Shape::Polygon: {
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const std::size_t i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
      const double span = cumulative_[i + 1] - cumulative_[i];
      const double w = span > 0 ? (u - cumulative_[i]) / span : 0.0;
      const Vec2& a = vertices_[i];
      const Vec2& b = vertices_[(i + 1) % vertices_.size()];
      return a + w * (b - a);
    }
    case Shape::Curve:
      return curve_(u);
  }
  return Vec2::Zero();
}

std::vector<Vec2> PlanarRegion::sample(int n) const {
  std::vector<Vec2> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = point(static_cast<double>(i) / n);
  return pts;
}

std::vector<Vec2> PlanarRegion::outline() const {
  if (shape_ == Shape::Polygon) return vertices_;
  return sample(resolution_);
}

double PlanarRegion::area() const {
  if (shape_ == Shape::Circle) return kPi * radius_ * radius_;
  return shoelace(outline());
}

Vec2 PlanarRegion::centroid() const {
  if (shape_ == Shape::Circle) return center_;
  const auto pts = outline();
  Vec2 c = Vec2::Zero();
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % pts.size()];
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  return c / (3.0 * a);
}

void PlanarRegion::validate() const {
  if (shape_ == Shape::Circle) return;
  const auto pts = outline();
  for (const auto& p : pts)
    if (!p.allFinite()) throw Error("region boundary has a non-finite point");
  if (!(shoelace(pts) > 0))
    throw Error("region boundary must be positively oriented (counterclockwise)");
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n])) {
        std::ostringstream os;
        os << "region boundary self-intersects between segments " << i << " and " << j;
        throw Error(os.str());
      }
    }
  }
}

int winding_around(const std::vector<Vec2>& closed, const Vec2& p) {
  // Crossing-number form of the winding number.
  int w = 0;
  const std::size_t n = closed.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = closed[i];
    const Vec2& b = closed[(i + 1) % n];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross(b - a, p - a) > 0) ++w;
    } else if (b.y() <= p.y() && cross(b - a, p - a) < 0) {
      --w;
    }
  }
  return w;
}

bool PlanarRegion::contains(const Vec2& p) const {
  if (shape_ == Shape::Circle) return (p - center_).norm() < radius_;
  return winding_around(outline(), p) != 0;
}

double PlanarRegion::distance_to_boundary(const Vec2& p) const {
  if (shape_ == Shape::Circle) return std::abs(radius_ - (p - center_).norm());
  const auto pts = outline();
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    d = std::min(d, segment_distance(p, pts[i], pts[(i + 1) % pts.size()]));
  return d;
}

std::string PlanarRegion::describe() const {
  std::ostringstream os;
  switch (shape_) {
    case Shape::Circle:
      os << "circle(" << center_.x() << ", " << center_.y() << ", " << radius_ << ", "
         << resolution_ << ")";
      break;
    case Shape::Polygon:
      os << "polygon([";
      for (std::size_t i = 0; i < vertices_.size(); ++i)
        os << (i ? ", " : "") << "(" << vertices_[i].x() << ", " << vertices_[i].y() << ")";
      os << "])";
      break;
    case Shape::Curve:
      os << "curve(" << resolution_ << " samples)";
      break;
  }
  if (star_center_) os << " star_center=(" << star_center_->x() << ", " << star_center_->y() << ")";
  return os.str();
}

ProductRegion::ProductRegion(std::vector<PlanarRegion> f) : factors(std::move(f)) {
  if (factors.empty()) throw Error("product region needs at least one factor");
}

ProductRegion::ProductRegion(PlanarRegion single) : factors{std::move(single)} {}

bool ProductRegion::contains(const Vec& x) const {
  if (x.size() != dim()) throw Error("product region: dimension mismatch");
  for (std::size_t j = 0; j < factors.size(); ++j)
    if (!factors[j].contains(x.segment<2>(2 * static_cast<Eigen::Index>(j)))) return false;
  return true;
}

double ProductRegion::distance_to_boundary(const Vec& x) const {
  if (x.size() != dim()) throw Error("product region: dimension mismatch");
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < factors.size(); ++j)
    d = std::min(d, factors[j].distance_to_boundary(x.segment<2>(2 * static_cast<Eigen::Index>(j))));
  return d;
}

Vec ProductRegion::center() const {
  Vec c(dim());
  for (std::size_t j = 0; j < factors.size(); ++j) {
    const auto& f = factors[j];
    c.segment<2>(2 * static_cast<Eigen::Index>(j)) = f.star_center() ? *f.star_center() : f.centroid();
  }
  return c;
}

std::vector<Vec> ProductRegion::boundary_samples(int n) const {
  std::vector<Vec> out;
  const Vec c = center();
  constexpr double kGolden = 0.6180339887498949;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    const auto pts = factors[j].sample(n);
    for (int i = 0; i < n; ++i) {
      Vec x = c;
      for (std::size_t m = 0; m < factors.size(); ++m) {
        if (m == j || i % 2 == 0) continue;
        const double u = std::fmod(kGolden * i, 1.0);
        x.segment<2>(2 * static_cast<Eigen::Index>(m)) = factors[m].point(u);
      }
      x.segment<2>(2 * static_cast<Eigen::Index>(j)) = pts[static_cast<std::size_t>(i)];
      out.push_back(std::move(x));
    }
  }
  return out;
}

double accumulate_angle(const std::vector<Vec2>& values) {
  double total = 0.0;
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = values[i];
    const Vec2& b = values[(i + 1) % n];
    total += wrap_angle(std::atan2(b.y(), b.x()) - std::atan2(a.y(), a.x()));
  }
  return total;
}

DegreeReport winding_number(const PlanarField& f, const PlanarRegion& region,
                            const WindingOptions& opt) {
  if (opt.initial_samples < 3 || opt.max_samples < opt.initial_samples)
    throw Error("winding_number: invalid sample counts");

  struct Sample {
    double u;
    Vec2 x;
    Vec2 v;
  };
  auto eval_all = [&](std::vector<Sample>& s) {
    parallel_for(s.size(), [&](std::size_t i) {
      s[i].x = region.point(s[i].u);
      s[i].v = f(s[i].x);
    });
  };
  auto check_vanish = [&](const std::vector<Sample>& s) {
    for (const auto& smp : s) {
      const double nrm = smp.v.norm();
      if (!(nrm >= opt.vanish_tol)) {
        std::ostringstream os;
        os << "field vanishes on the boundary at (" << smp.x.x() << ", " << smp.x.y()
           << "), |F| = " << nrm;
        throw FieldVanishes(os.str(), smp.x, nrm);
      }
    }
  };
  auto increment = [](const Sample& a, const Sample& b) {
    return wrap_angle(std::atan2(b.v.y(), b.v.x()) - std::atan2(a.v.y(), a.v.x()));
  };

  std::vector<Sample> samples(static_cast<std::size_t>(opt.initial_samples));
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i].u = static_cast<double>(i) / opt.initial_samples;
  eval_all(samples);
  check_vanish(samples);

  const double min_width = 1.0 / static_cast<double>(opt.max_samples);
  long used = opt.initial_samples;
  bool refined = false;
  for (;;) {
    std::vector<Sample> mids;
    std::vector<std::size_t> where;
    const std::size_t n = samples.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Sample& a = samples[i];
      const Sample& b = samples[(i + 1) % n];
      if (std::abs(increment(a, b)) < kPi / 2) continue;
      const double ub = (i + 1 == n) ? 1.0 : b.u;
      if (ub - a.u <= min_width * (1 + 1e-9)) {
        std::ostringstream os;
        os << "winding number refinement cap (" << opt.max_samples
           << " samples) reached near (" << a.x.x() << ", " << a.x.y() << ")";
        throw NonConvergent(os.str(), a.x);
      }
      mids.push_back({0.5 * (a.u + ub), Vec2::Zero(), Vec2::Zero()});
      where.push_back(i);
    }
    if (mids.empty()) break;
    refined = true;
    eval_all(mids);
    check_vanish(mids);
    used += static_cast<long>(mids.size());
    std::vector<Sample> merged;
    merged.reserve(n + mids.size());
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      merged.push_back(samples[i]);
      if (m < where.size() && where[m] == i) merged.push_back(mids[m++]);
    }
    samples = std::move(merged);
  }

  DegreeReport rep;
  rep.samples_used = used;
  rep.refined = refined;
  rep.min_field_norm = std::numeric_limits<double>::infinity();
  std::vector<Vec2> vals;
  vals.reserve(samples.size());
  for (const auto& s : samples) {
    vals.push_back(s.v);
    if (s.v.norm() < rep.min_field_norm) {
      rep.min_field_norm = s.v.norm();
      rep.min_point = s.x;
    }
  }
  rep.total_angle = accumulate_angle(vals);
  const double turns = std::round(rep.total_angle / kTwoPi);
  if (std::abs(rep.total_angle - kTwoPi * turns) > opt.residue_tol)
    throw NonConvergent("accumulated angle is not a multiple of 2*pi", rep.min_point);
  rep.degree = static_cast<int>(turns);
  return rep;
}

DegreeReport product_degree(const std::vector<PlanarField>& fields, const ProductRegion& region,
                            const WindingOptions& opt) {
  if (fields.size() != region.factors.size())
    throw Error("product_degree: one field per factor region is required");
  DegreeReport rep;
  rep.degree = 1;
  rep.min_field_norm = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < fields.size(); ++j) {
    const DegreeReport r = winding_number(fields[j], region.factors[j], opt);
    rep.degree *= r.degree;
    rep.samples_used += r.samples_used;
    rep.refined = rep.refined || r.refined;
    rep.total_angle += r.total_angle;
    if (r.min_field_norm < rep.min_field_norm) {
      rep.min_field_norm = r.min_field_norm;
      rep.min_point = r.min_point;
    }
  }
  return rep;
}

PlanarRegion contract(const PlanarRegion& region, double delta) {
  if (!(delta > -1.0 && delta < 1.0)) throw Error("contract: delta must lie in (-1, 1)");
  if (!region.star_center()) throw Error("contract: region has no star center");
  const Vec2 c = *region.star_center();
  const double s = 1.0 - delta;
  switch (region.shape()) {
    case PlanarRegion::Shape::Circle:
      return PlanarRegion::circle(c + s * (region.center() - c), s * region.radius(),
                                  region.resolution())
          .with_star_center(c);
    case PlanarRegion::Shape::Polygon: {
      std::vector<Vec2> v = region.vertices();
      for (auto& p : v) p = c + s * (p - c);
      return PlanarRegion::polygon(std::move(v), region.resolution()).with_star_center(c);
    }
    case PlanarRegion::Shape::Curve:
      return PlanarRegion::curve([region, c, s](double u) { return Vec2(c + s * (region.point(u) - c)); },
                                 region.resolution())
          .with_star_center(c);
  }
  return region;
}

}  // namespace smallpar
