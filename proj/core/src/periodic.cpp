#include "smallpar/periodic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace smallpar {

std::pair<Vec, Mat> period_map(const SystemDef& sys, double eps, const Vec& xi,
                               const IntegratorConfig& cfg, bool inverse) {
  const int k = sys.k;
  if (xi.size() != k) throw Error("period_map: dimension mismatch");
  Rhs rhs = [&sys, k, eps, x = Vec(k), f = Vec(k), g = Vec(k), a = Mat(k, k), b = Mat(k, k)](
                double t, const Vec& s, Vec& ds) mutable {
    x = s.head(k);
    sys.psi(t, x, f);
    sys.psi_jac(t, x, a);
    if (eps != 0.0) {
      sys.phi(t, x, g);
      sys.phi_jac(t, x, b);
      f += eps * g;
      a += eps * b;
    }
    ds.head(k) = f;
    Eigen::Map<Mat>(ds.data() + k, k, k) = a * Eigen::Map<const Mat>(s.data() + k, k, k);
  };
  Vec s0(k + k * k);
  s0.head(k) = xi;
  Eigen::Map<Mat>(s0.data() + k, k, k).setIdentity();
  const double t0 = inverse ? sys.period : 0.0;
  const Vec end = integrate(rhs, t0, sys.period - t0, s0, cfg).back();
  return {end.head(k), Eigen::Map<const Mat>(end.data() + k, k, k)};
}

namespace {

double rcond_of(const Mat& j) {
  if (!j.allFinite() || j.norm() == 0.0) return 0.0;
  const double r = Eigen::PartialPivLU<Mat>(j).rcond();
  return std::isfinite(r) ? r : 0.0;
}

struct NewtonOutcome {
  Vec xi;
  Vec r;
  Mat y;
  int iterations = 0;
  bool converged = false;
  bool singular = false;
};

// Damped Newton on P(xi) - xi (or the inverse map). Appends to `history`.
NewtonOutcome newton(const SystemDef& sys, double eps, const Vec& seed, bool inverse,
                     const ShootOptions& opt, const IntegratorConfig& cfg,
                     std::vector<double>& history) {
  const int k = sys.k;
  NewtonOutcome out;
  out.xi = seed;
  std::tie(out.r, out.y) = period_map(sys, eps, seed, cfg, inverse);
  out.r -= seed;
  for (int it = 0;; ++it) {
    history.push_back(out.r.norm());
    const Mat j = out.y - Mat::Identity(k, k);
    const double rc = rcond_of(j);
    out.iterations = it;
    if (out.r.norm() <= opt.tol) {
      out.converged = true;
      out.singular = rc < opt.singular_rcond;
      return out;
    }
    if (rc < opt.singular_rcond) {
      if (eps == 0.0) {
        out.singular = true;
        return out;
      }
      std::ostringstream os;
      os << "shoot: singular period-map Jacobian (rcond " << rc << ") at eps = " << eps;
      throw SingularJacobian(os.str());
    }
    if (it >= opt.max_iterations)
      throw NewtonStalled("shoot: no convergence within " + std::to_string(opt.max_iterations) +
                              " Newton iterations",
                          history);
    const Vec step = Eigen::PartialPivLU<Mat>(j).solve(-out.r);
    double lam = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, lam *= 0.5) {
      const Vec cand = out.xi + lam * step;
      try {
        auto [pc, yc] = period_map(sys, eps, cand, cfg, inverse);
        const Vec rn = pc - cand;
        if (rn.norm() < out.r.norm()) {
          out.xi = cand;
          out.r = rn;
          out.y = std::move(yc);
          accepted = true;
          break;
        }
      } catch (const IntegrationError&) {
      }
    }
    if (!accepted) throw NewtonStalled("shoot: damping could not reduce the residual", history);
  }
}

}  // namespace

PeriodicOrbitResult shoot(const SystemDef& sys, double eps, const Vec& seed,
                          const ShootOptions& opt, const IntegratorConfig& cfg) {
  if (!(eps >= 0)) throw Error("shoot: eps must be non-negative");
  if (seed.size() != sys.k || !seed.allFinite()) throw Error("shoot: seed must be finite with k entries");
  PeriodicOrbitResult res;
  res.eps = eps;
  res.seed = seed;

  NewtonOutcome nw;
  try {
    nw = newton(sys, eps, seed, false, opt, cfg, res.residual_history);
  } catch (const Error& forward_error) {
    if (!opt.reverse_fallback || eps == 0.0) throw;
    try {
      const NewtonOutcome back = newton(sys, eps, seed, true, opt, cfg, res.residual_history);
      nw = newton(sys, eps, back.xi, false, opt, cfg, res.residual_history);
      res.note = "converged on the inverse period map, polished forward";
    } catch (const Error&) {
      const std::string msg = std::string(forward_error.what()) + "; inverse-map shooting also failed";
      if (dynamic_cast<const SingularJacobian*>(&forward_error)) throw SingularJacobian(msg);
      throw NewtonStalled(msg, res.residual_history);
    }
  }
  res.converged = nw.converged;
  res.singular = nw.singular;
  res.iterations = static_cast<int>(res.residual_history.size()) - 1;
  if (nw.singular && !nw.converged)
    res.note = "period-map Jacobian singular at eps = 0 (non-isolated periodic points)";
  res.xi = nw.xi;
  res.residual = nw.r.norm();
  const Eigen::EigenSolver<Mat> es(nw.y, false);
  const Eigen::VectorXcd ev = es.eigenvalues();
  res.multipliers.assign(ev.data(), ev.data() + ev.size());
  std::sort(res.multipliers.begin(), res.multipliers.end(),
            [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  res.orbit = integrate(full_field(sys, eps), 0.0, sys.period, res.xi, cfg);
  return res;
}

MembershipReport membership_X(const SystemDef& sys, const Trajectory& orbit,
                              const ProductRegion& region, int grid_points,
                              const IntegratorConfig& cfg) {
  if (region.dim() != sys.k) throw Error("membership_X: region dimension mismatch");
  if (orbit.t_min() > 0 || orbit.t_max() < sys.period * (1 - 1e-12))
    throw Error("membership_X: orbit must cover [0, T]");
  const auto ts = uniform_grid(0.0, std::min(sys.period, orbit.t_max()), grid_points);
  std::vector<Vec> pulled(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    pulled[i] = flow_omega(sys, 0.0, ts[i], orbit(ts[i]), cfg);
  });
  MembershipReport rep;
  rep.in_X = true;
  rep.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double d = region.distance_to_boundary(pulled[i]);
    if (!region.contains(pulled[i])) {
      rep.in_X = false;
      rep.margin = d;
      rep.witness_time = ts[i];
      rep.witness_point = pulled[i];
      return rep;
    }
    if (d < rep.margin) {
      rep.margin = d;
      rep.witness_time = ts[i];
      rep.witness_point = pulled[i];
    }
  }
  return rep;
}

double distance_to_curve(const Trajectory& curve, const Vec& p, int samples) {
  const auto ts = uniform_grid(curve.t_min(), curve.t_max(), samples);
  double best = std::numeric_limits<double>::infinity();
  Vec prev = curve(ts[0]);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    Vec cur = curve(ts[i]);
    const Vec seg = cur - prev;
    const double len2 = seg.squaredNorm();
    const double u = len2 > 0 ? std::clamp((p - prev).dot(seg) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (prev + u * seg - p).norm());
    prev = std::move(cur);
  }
  return best;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double den = n * sxx - sx * sx;
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

SweepResult eps_sweep(const SystemDef& sys, const ProductRegion& region,
                      const std::vector<double>& eps_list, const SweepOptions& opt,
                      const Trajectory* cycle, const IntegratorConfig& cfg) {
  SweepResult out;
  if (eps_list.empty()) return out;
  for (double e : eps_list)
    if (!(e > 0)) throw Error("eps_sweep: every eps must be positive");
  if (opt.seed.size() != sys.k) throw Error("eps_sweep: seed dimension mismatch");

  auto attempt = [&](double eps, const Vec& seed) -> PeriodicOrbitResult {
    std::vector<Vec> seeds{seed};
    if (opt.fallback_seed) seeds.push_back(*opt.fallback_seed);
    std::string notes;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      try {
        PeriodicOrbitResult r = shoot(sys, eps, seeds[si], opt.shoot, cfg);
        if (si > 0) r.note = "primary seed failed (" + notes + "); used fallback seed";
        const MembershipReport m = membership_X(sys, r.orbit, region, opt.membership_points, cfg);
        r.in_X = m.in_X;
        r.dist_to_boundary = region.distance_to_boundary(r.xi);
        if (cycle) r.dist_to_cycle = distance_to_curve(*cycle, r.xi);
        return r;
      } catch (const Error& e) {
        notes += (notes.empty() ? "" : "; ") + std::string(e.what());
      }
    }
    PeriodicOrbitResult r;
    r.eps = eps;
    r.seed = seed;
    r.note = notes;
    return r;
  };

  if (opt.strategy == SeedStrategy::Fixed) {
    out.orbits.resize(eps_list.size());
    parallel_for(eps_list.size(), [&](std::size_t i) { out.orbits[i] = attempt(eps_list[i], opt.seed); });
  } else {
    Vec seed = opt.seed;
    for (double eps : eps_list) {
      out.orbits.push_back(attempt(eps, seed));
      if (out.orbits.back().converged) seed = out.orbits.back().xi;
    }
  }
  std::vector<double> xs, ys;
  for (const auto& o : out.orbits) {
    if (!o.converged) continue;
    xs.push_back(o.eps);
    ys.push_back(o.dist_to_cycle);
  }
  out.slope = loglog_slope(xs, ys);
  return out;
}

}  // namespace smallpar
