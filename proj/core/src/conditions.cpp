#include "smallpar/conditions.hpp"

#include "smallpar/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace smallpar {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string point_str(const Vec& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + num(x[i]);
  return s + ")";
}

std::vector<std::string> state_columns(const std::string& prefix, int k) {
  std::vector<std::string> c;
  for (int i = 1; i <= k; ++i) c.push_back(prefix + std::to_string(i));
  return c;
}

void require_dim(const SystemDef& sys, const ProductRegion& region, const char* who) {
  if (region.dim() != sys.k)
    throw Error(std::string(who) + ": region dimension " + std::to_string(region.dim()) +
                " does not match system dimension " + std::to_string(sys.k));
}

Vec perp(const Vec& v) { return Vec2(-v[1], v[0]); }

void require_cycle(const SystemDef& sys, const Trajectory& cycle, const char* who) {
  if (cycle.dim() != sys.k) throw Error(std::string(who) + ": cycle dimension mismatch");
  if (std::abs(cycle.t_max() - cycle.t_min() - sys.period) > 1e-9 * sys.period)
    throw NonPeriodicCycle(std::string(who) + ": cycle must span exactly one period");
  const double res = (cycle.back() - cycle.front()).norm();
  if (!(res <= 1e-6))
    throw NonPeriodicCycle(std::string(who) + ": cycle residual " + num(res) +
                           " exceeds 1e-6");
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "holds";
    case Verdict::Fails:
      return "fails";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

HypothesisReport check_A0(const SystemDef& sys, const ProductRegion& region, int n_samples,
                          const ConditionTolerances& tol, const IntegratorConfig& cfg) {
  require_dim(sys, region, "check_A0");
  if (n_samples < 16) throw Error("check_A0: at least 16 boundary samples required");
  const auto pts = region.boundary_samples(n_samples);
  const std::size_t n = pts.size();
  std::vector<Vec> ends(n);
  std::vector<std::string> errors(n);
  parallel_for(n, [&](std::size_t i) {
    try {
      ends[i] = flow_omega(sys, sys.period, 0.0, pts[i], cfg);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  HypothesisReport rep;
  rep.id = "A0";
  rep.settings = {{"boundary_samples", n_samples}, {"a0_tol", tol.a0_tol}};
  rep.table.columns = state_columns("xi", sys.k);
  rep.table.columns.push_back("residual");

  double worst_ratio = -1.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      rep.verdict = Verdict::Inconclusive;
      rep.witness = Witness{pts[i], Vec(), std::numeric_limits<double>::quiet_NaN(), errors[i]};
      rep.summary = "A0 inconclusive (integration failed at " + point_str(pts[i]) + ": " +
                    errors[i] + ")";
      return rep;
    }
    const double r = (ends[i] - pts[i]).norm();
    rep.margin = std::max(rep.margin, r);
    const double ratio = r / (tol.a0_tol * (1.0 + pts[i].norm()));
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = i;
    }
    std::vector<double> row(pts[i].data(), pts[i].data() + pts[i].size());
    row.push_back(r);
    rep.table.rows.push_back(std::move(row));
  }
  rep.witness = Witness{pts[worst], ends[worst] - pts[worst],
                        std::numeric_limits<double>::quiet_NaN(), "worst boundary residual"};
  rep.verdict = worst_ratio <= 1.0 ? Verdict::Holds : Verdict::Fails;
  rep.summary = std::string("A0 ") + to_string(rep.verdict) + " (max residual " +
                num(rep.margin) +
                (rep.verdict == Verdict::Fails ? " at " + point_str(pts[worst]) : "") + ")";
  return rep;
}

HypothesisReport check_A1(const SystemDef& sys, const ProductRegion& region,
                          std::span<const double> s_grid, int boundary_samples,
                          const ConditionTolerances& tol, const IntegratorConfig& cfg) {
  require_dim(sys, region, "check_A1");
  for (double s : s_grid)
    if (s < 0 || s > sys.period) throw Error("check_A1: s grid must lie in [0, T]");
  if (s_grid.empty()) throw Error("check_A1: empty s grid");
  const auto pts = region.boundary_samples(boundary_samples);
  const std::size_t n = pts.size();
  std::vector<double> min_norm(n, std::numeric_limits<double>::infinity());
  std::vector<double> arg_s(n, 0.0);
  std::vector<Vec> min_val(n);
  std::vector<std::string> errors(n);
  parallel_for(n, [&](std::size_t i) {
    try {
      const DefectProfile prof(sys, pts[i], cfg);
      for (double s : s_grid) {
        Vec d = prof(s);
        if (d.norm() < min_norm[i]) {
          min_norm[i] = d.norm();
          arg_s[i] = s;
          min_val[i] = std::move(d);
        }
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  HypothesisReport rep;
  rep.id = "A1";
  rep.settings = {{"s_points", static_cast<double>(s_grid.size())},
                  {"boundary_samples", boundary_samples},
                  {"a1_tol", tol.a1_tol}};
  rep.table.columns = state_columns("xi", sys.k);
  rep.table.columns.push_back("min_defect");
  rep.table.columns.push_back("s_at_min");
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      rep.verdict = Verdict::Inconclusive;
      rep.witness = Witness{pts[i], Vec(), std::numeric_limits<double>::quiet_NaN(), errors[i]};
      rep.summary = "A1 inconclusive (integration failed at " + point_str(pts[i]) + ")";
      return rep;
    }
    if (min_norm[i] < min_norm[worst]) worst = i;
    std::vector<double> row(pts[i].data(), pts[i].data() + pts[i].size());
    row.push_back(min_norm[i]);
    row.push_back(arg_s[i]);
    rep.table.rows.push_back(std::move(row));
  }
  rep.margin = min_norm[worst];
  rep.witness = Witness{pts[worst], min_val[worst], arg_s[worst], "smallest defect (parameter = s)"};
  rep.verdict = rep.margin >= tol.a1_tol ? Verdict::Holds : Verdict::Fails;
  rep.summary = std::string("A1 ") + to_string(rep.verdict) + " (min defect " + num(rep.margin) +
                " at xi = " + point_str(pts[worst]) + ", s = " + num(arg_s[worst]) + ")";
  return rep;
}

A2Result check_A2(const SystemDef& sys, const ProductRegion& region, int boundary_samples,
                  const WindingOptions& wopt, const IntegratorConfig& cfg) {
  require_dim(sys, region, "check_A2");
  A2Result out;
  HypothesisReport& rep = out.report;
  rep.id = "A2";
  rep.settings = {{"boundary_samples", boundary_samples},
                  {"vanish_tol", wopt.vanish_tol},
                  {"max_samples", static_cast<double>(wopt.max_samples)}};

  const auto defect = eta_defect_field(sys, 0.0, cfg);
  const Vec center = region.center();
  std::vector<PlanarField> fields;
  for (std::size_t j = 0; j < region.factors.size(); ++j) {
    const Eigen::Index off = 2 * static_cast<Eigen::Index>(j);
    fields.push_back([defect, center, off](const Vec2& p) -> Vec2 {
      Vec x = center;
      x.segment<2>(off) = p;
      return defect(x).segment<2>(off);
    });
  }

  if (!region.planar()) {
    const auto probe = region.boundary_samples(8);
    double coupling = 0.0;
    for (const Vec& x : probe) {
      const Vec full = defect(x);
      for (std::size_t j = 0; j < region.factors.size(); ++j) {
        const Eigen::Index off = 2 * static_cast<Eigen::Index>(j);
        const Vec2 frozen = fields[j](x.segment<2>(off));
        const double scale = std::max(frozen.norm(), 1e-300);
        coupling = std::max(coupling, (full.segment<2>(off) - frozen).norm() / scale);
      }
    }
    out.coupling = coupling;
    rep.settings["coupling"] = coupling;
  }

  WindingOptions w1 = wopt;
  w1.initial_samples = boundary_samples;
  WindingOptions w2 = wopt;
  w2.initial_samples = 2 * boundary_samples;
  w2.max_samples = std::max<long>(wopt.max_samples, w2.initial_samples);
  try {
    out.degree = product_degree(fields, region, w1);
    out.degree_refined = product_degree(fields, region, w2);
  } catch (const FieldVanishes& e) {
    Vec p(2);
    p << e.point().x(), e.point().y();
    rep.verdict = Verdict::Inconclusive;
    rep.witness = Witness{p, Vec(), e.norm(), "defect vanishes on the boundary (parameter = |F|)"};
    rep.summary = std::string("A2 inconclusive (") + e.what() + ")";
    return out;
  } catch (const NonConvergent& e) {
    Vec p(2);
    p << e.point().x(), e.point().y();
    rep.verdict = Verdict::Inconclusive;
    rep.witness = Witness{p, Vec(), std::numeric_limits<double>::quiet_NaN(),
                          "angle refinement did not settle (defect nearly vanishes)"};
    rep.summary = std::string("A2 inconclusive (") + e.what() + ")";
    return out;
  }

  rep.table.columns = {"u", "xi1", "xi2", "F1", "F2"};
  if (region.planar()) {
    const auto& f = region.factors[0];
    for (int i = 0; i < boundary_samples; ++i) {
      const double u = static_cast<double>(i) / boundary_samples;
      const Vec2 p = f.point(u);
      const Vec2 v = fields[0](p);
      rep.table.rows.push_back({u, p.x(), p.y(), v.x(), v.y()});
    }
  }

  const DegreeReport& d = *out.degree;
  rep.margin = std::abs(d.degree);
  Vec mp(2);
  mp << d.min_point.x(), d.min_point.y();
  rep.witness = Witness{mp, Vec(), d.min_field_norm, "smallest |F| on the boundary (parameter)"};
  if (d.degree != out.degree_refined->degree) {
    rep.verdict = Verdict::Inconclusive;
    rep.summary = "A2 inconclusive (degree " + std::to_string(d.degree) + " changes to " +
                  std::to_string(out.degree_refined->degree) + " under refinement)";
  } else if (!region.planar() && out.coupling > 1e-6) {
    rep.verdict = Verdict::Inconclusive;
    rep.summary = "A2 inconclusive (defect does not decouple over the product, coupling " +
                  num(out.coupling) + ")";
  } else {
    rep.verdict = d.degree != 0 ? Verdict::Holds : Verdict::Fails;
    rep.summary = std::string("A2 ") + to_string(rep.verdict) + " (degree " +
                  std::to_string(d.degree) + ", min |F| " + num(d.min_field_norm) + ")";
  }
  return out;
}

HypothesisReport check_A3(const SystemDef& sys, const Trajectory& cycle,
                          std::span<const double> theta_grid, const ConditionTolerances& tol,
                          const IntegratorConfig& cfg) {
  const auto phases = floquet_condition_A3(sys, cycle, theta_grid, cfg, tol.floquet);
  HypothesisReport rep;
  rep.id = "A3";
  rep.settings = {{"theta_points", static_cast<double>(theta_grid.size())},
                  {"one_tol", tol.floquet.one_tol},
                  {"gap_tol", tol.floquet.gap_tol}};
  rep.table.columns = {"theta"};
  for (int i = 1; i <= sys.k; ++i) {
    rep.table.columns.push_back("mu" + std::to_string(i) + "_re");
    rep.table.columns.push_back("mu" + std::to_string(i) + "_im");
  }
  for (const char* c : {"distance_to_one", "gap", "liouville_error"}) rep.table.columns.push_back(c);

  rep.verdict = Verdict::Holds;
  rep.margin = std::numeric_limits<double>::infinity();
  const FloquetPhaseReport* bad = nullptr;
  for (const auto& ph : phases) {
    std::vector<double> row{ph.theta};
    for (const auto& mu : ph.monodromy.multipliers) {
      row.push_back(mu.real());
      row.push_back(mu.imag());
    }
    row.push_back(ph.distance_to_one);
    row.push_back(ph.gap);
    row.push_back(ph.monodromy.liouville_error);
    rep.table.rows.push_back(std::move(row));
    rep.margin = std::min(rep.margin, ph.gap);
    if (!ph.simple && !bad) bad = &ph;
  }
  if (bad) {
    rep.verdict = Verdict::Fails;
    Vec th(1);
    th << bad->theta;
    Vec mu(2);
    mu << bad->closest_to_one.real(), bad->closest_to_one.imag();
    rep.witness = Witness{th, mu, bad->gap,
                          bad->one_is_multiplier ? "multiplier 1 is not simple (parameter = gap)"
                                                 : "1 is not a multiplier (value = closest)"};
    rep.summary = "A3 fails (theta = " + num(bad->theta) + ": |mu - 1| = " +
                  num(bad->distance_to_one) + ", gap " + num(bad->gap) + ")";
  } else {
    rep.summary = "A3 holds (multiplier 1 simple at every phase, min gap " + num(rep.margin) + ")";
  }
  return rep;
}

MelnikovProfile melnikov_profile(const SystemDef& sys, const Trajectory& cycle,
                                 std::span<const double> theta_grid, int panels) {
  if (sys.k != 2) throw Error("melnikov_profile: planar systems only (k = 2)");
  require_cycle(sys, cycle, "melnikov_profile");
  const double T = sys.period;
  const double t0 = cycle.t_min();
  const QuadratureGrid grid = composite_gauss_legendre(0.0, T, panels);
  const std::size_t m = grid.nodes.size();
  const std::size_t per = static_cast<std::size_t>(kGaussPanelOrder);

  auto x0 = [&](double t) { return cycle(t0 + t); };
  auto div = [&](double t) { return sys.psi_div(t, x0(t)); };

  std::vector<Vec> xs(m), perps(m);
  std::vector<double> partial(m);
  parallel_for(m, [&](std::size_t i) {
    const double t = grid.nodes[i];
    xs[i] = x0(t);
    perps[i] = perp(sys.eval_psi(t, xs[i]));
    const double a = T * static_cast<double>(i / per) / panels;
    partial[i] = composite_gauss_legendre(a, t, 1).integrate(div);
  });

  MelnikovProfile prof;
  prof.nodes = grid.nodes;
  prof.weights.resize(m);
  double acc = 0.0;
  for (std::size_t p = 0; p * per < m; ++p) {
    double panel = 0.0;
    for (std::size_t j = p * per; j < (p + 1) * per; ++j) {
      prof.weights[j] = std::exp(-(acc + partial[j]));
      panel += grid.weights[j] * div(grid.nodes[j]);
    }
    acc += panel;
  }
  const auto [wmin, wmax] = std::minmax_element(prof.weights.begin(), prof.weights.end());
  prof.weight_min = *wmin;
  prof.weight_max = *wmax;

  prof.theta.assign(theta_grid.begin(), theta_grid.end());
  prof.values.resize(theta_grid.size());
  parallel_for(theta_grid.size(), [&](std::size_t q) {
    const double th = theta_grid[q];
    Vec f(2);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sys.phi(grid.nodes[i] - th, xs[i], f);
      sum += grid.weights[i] * prof.weights[i] * f.dot(perps[i]);
    }
    if (!std::isfinite(sum)) throw Error("melnikov_profile: non-finite value at theta = " + num(th));
    prof.values[q] = sum;
  });
  prof.min_abs = std::numeric_limits<double>::infinity();
  prof.max_abs = 0.0;
  for (double v : prof.values) {
    prof.min_abs = std::min(prof.min_abs, std::abs(v));
    prof.max_abs = std::max(prof.max_abs, std::abs(v));
  }
  if (prof.values.empty()) prof.min_abs = 0.0;
  return prof;
}

HypothesisReport check_A3_1(const MelnikovProfile& profile, const ConditionTolerances& tol) {
  HypothesisReport rep;
  rep.id = "A3_1";
  rep.settings = {{"theta_points", static_cast<double>(profile.theta.size())},
                  {"melnikov_tol", tol.melnikov_tol}};
  rep.table.columns = {"theta", "M"};
  std::size_t worst = 0;
  for (std::size_t i = 0; i < profile.theta.size(); ++i) {
    rep.table.rows.push_back({profile.theta[i], profile.values[i]});
    if (std::abs(profile.values[i]) < std::abs(profile.values[worst])) worst = i;
  }
  rep.margin = profile.min_abs;
  const bool ok = profile.min_abs > 0 && profile.min_abs > tol.melnikov_tol * profile.max_abs;
  rep.verdict = ok ? Verdict::Holds : Verdict::Fails;
  if (!profile.theta.empty()) {
    Vec th(1);
    th << profile.theta[worst];
    Vec v(1);
    v << profile.values[worst];
    rep.witness = Witness{th, v, std::numeric_limits<double>::quiet_NaN(), "smallest |M(theta)|"};
  }
  rep.summary = std::string("A3_1 ") + to_string(rep.verdict) + " (min |M| " +
                num(profile.min_abs) + ", max |M| " + num(profile.max_abs) + ")";
  return rep;
}

std::vector<double> defect_normal_projection(const SystemDef& sys, const Trajectory& cycle,
                                             double s, std::span<const double> theta_grid,
                                             const IntegratorConfig& cfg) {
  if (sys.k != 2) throw Error("defect_normal_projection: planar systems only (k = 2)");
  require_cycle(sys, cycle, "defect_normal_projection");
  std::vector<double> out(theta_grid.size());
  parallel_for(theta_grid.size(), [&](std::size_t i) {
    const double th = theta_grid[i];
    const Vec x = periodic_eval(cycle, th);
    const Vec d = DefectProfile(sys, x, cfg)(s);
    out[i] = d.dot(perp(sys.eval_psi(th, x)));
  });
  return out;
}

Theorem2Report theorem2_compare(const SystemDef& sys1, const SystemDef& sys2,
                                const PlanarRegion& region, std::span<const double> lambda_grid,
                                std::span<const double> s_grid, int boundary_samples,
                                const ConditionTolerances& tol, const WindingOptions& wopt,
                                const IntegratorConfig& cfg) {
  if (sys1.k != 2 || sys2.k != 2) throw Error("theorem2_compare: planar systems only");
  if (sys1.period != sys2.period) throw Error("theorem2_compare: periods differ");
  Theorem2Report out;
  HypothesisReport& rep = out.report;
  rep.id = "T2";
  rep.settings = {{"lambda_points", static_cast<double>(lambda_grid.size())},
                  {"s_points", static_cast<double>(s_grid.size())},
                  {"boundary_samples", boundary_samples},
                  {"a1_tol", tol.a1_tol}};

  const auto pts = region.sample(boundary_samples);
  const std::size_t n = pts.size(), ns = s_grid.size();
  std::vector<std::vector<Vec>> d1(n), d2(n);
  parallel_for(n, [&](std::size_t i) {
    const DefectProfile p1(sys1, pts[i], cfg), p2(sys2, pts[i], cfg);
    for (double s : s_grid) {
      d1[i].push_back(p1(s));
      d2[i].push_back(p2(s));
    }
  });

  rep.table.columns = {"lambda", "min_defect"};
  double best = std::numeric_limits<double>::infinity();
  for (double lam : lambda_grid) {
    double lmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < ns; ++j) {
        const Vec d = lam * d1[i][j] + (1.0 - lam) * d2[i][j];
        const double nrm = d.norm();
        lmin = std::min(lmin, nrm);
        if (nrm < best) {
          best = nrm;
          rep.witness = Witness{Vec(pts[i]), d, lam,
                                "homotopy minimum (parameter = lambda, s = " + num(s_grid[j]) + ")"};
        }
      }
    }
    rep.table.rows.push_back({lam, lmin});
  }
  out.min_defect = best;
  rep.margin = best;
  if (best < tol.a1_tol) {
    rep.verdict = Verdict::Inconclusive;
    rep.summary = "T2 inconclusive (homotopy defect " + num(best) + " at lambda = " +
                  num(rep.witness->parameter) + ", xi = " + point_str(rep.witness->point) + ")";
    return out;
  }

  WindingOptions w = wopt;
  w.initial_samples = boundary_samples;
  try {
    out.degree1 = winding_number(
        [f = eta_defect_field(sys1, 0.0, cfg)](const Vec2& p) { return Vec2(f(p)); }, region, w)
                      .degree;
    out.degree2 = winding_number(
        [f = eta_defect_field(sys2, 0.0, cfg)](const Vec2& p) { return Vec2(f(p)); }, region, w)
                      .degree;
  } catch (const Error& e) {
    rep.verdict = Verdict::Inconclusive;
    rep.summary = std::string("T2 inconclusive (") + e.what() + ")";
    return out;
  }
  rep.verdict = *out.degree1 == *out.degree2 ? Verdict::Holds : Verdict::Fails;
  rep.summary = std::string("T2 ") + to_string(rep.verdict) + " (degrees " +
                std::to_string(*out.degree1) + " and " + std::to_string(*out.degree2) +
                ", min homotopy defect " + num(best) + ")";
  return out;
}

ResonanceMap::ResonanceMap(const expr::Expr& f, const expr::ParamMap& params, int panels)
    : f_(f, params) {
  if (f.state_dimension() > 2)
    throw Error("resonance_H: forcing may only use t, x1 (= u) and x2 (= v)");
  const QuadratureGrid g = composite_gauss_legendre(0.0, kTwoPi, panels);
  nodes_ = g.nodes;
  weights_ = g.weights;
  for (double t : nodes_) {
    sin_.push_back(std::sin(t));
    cos_.push_back(std::cos(t));
  }
}

Vec2 ResonanceMap::operator()(double a, double theta) const {
  Vec2 h = Vec2::Zero();
  double uv[2];
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    uv[0] = a * cos_[i];
    uv[1] = -a * sin_[i];
    const double v = weights_[i] * f_(nodes_[i] + theta, uv);
    h.x() += sin_[i] * v;
    h.y() += cos_[i] * v;
  }
  return h;
}

Eigen::Matrix2d ResonanceMap::jacobian(double a, double theta) const {
  const double h = 1e-5 * (1.0 + std::abs(a));
  Eigen::Matrix2d j;
  j.col(0) = ((*this)(a + h, theta) - (*this)(a - h, theta)) / (2 * h);
  j.col(1) = ((*this)(a, theta + h) - (*this)(a, theta - h)) / (2 * h);
  return j;
}

ResonanceMap resonance_H(const expr::Expr& f, const expr::ParamMap& params,
                         const ResonanceOptions& opt) {
  ResonanceMap map(f, params);
  const auto as = uniform_grid(opt.a_min, opt.a_max, opt.a_points);
  const auto ts = uniform_grid(opt.theta_min, opt.theta_max, opt.theta_points);
  const std::size_t n = as.size() * ts.size();

  std::vector<std::optional<ResonanceZero>> found(n);
  std::vector<std::string> notes(n);
  std::vector<double> seed_norm(n);
  parallel_for(n, [&](std::size_t idx) {
    double a = as[idx / ts.size()], th = ts[idx % ts.size()];
    Vec2 h = map(a, th);
    seed_norm[idx] = h.norm();
    for (int it = 0; it < opt.max_iterations; ++it) {
      if (h.norm() <= opt.newton_tol * (1.0 + std::abs(a))) break;
      const Eigen::Matrix2d j = map.jacobian(a, th);
      const Eigen::FullPivLU<Eigen::Matrix2d> lu(j);
      if (!lu.isInvertible()) {
        notes[idx] = "seed (" + num(as[idx / ts.size()]) + ", " + num(ts[idx % ts.size()]) +
                     "): singular Jacobian";
        return;
      }
      const Vec2 step = lu.solve(-h);
      double lam = 1.0;
      Vec2 hn = map(a + step.x(), th + step.y());
      for (int k = 0; k < 30 && hn.norm() >= h.norm(); ++k) {
        lam *= 0.5;
        hn = map(a + lam * step.x(), th + lam * step.y());
      }
      if (hn.norm() >= h.norm()) break;
      a += lam * step.x();
      th += lam * step.y();
      h = hn;
      if (lam * step.norm() <= 1e-14 * (1.0 + std::abs(a) + std::abs(th))) break;
    }
    if (!(h.norm() <= 1e-9 * (1.0 + std::abs(a)))) {
      notes[idx] = "seed (" + num(as[idx / ts.size()]) + ", " + num(ts[idx % ts.size()]) +
                   "): Newton did not converge (|H| = " + num(h.norm()) + ")";
      return;
    }
    th = std::fmod(th, kTwoPi);
    if (th < 0) th += kTwoPi;
    if (a < opt.a_min || a > opt.a_max) {
      notes[idx] = "seed (" + num(as[idx / ts.size()]) + ", " + num(ts[idx % ts.size()]) +
                   "): zero outside the a range";
      return;
    }
    ResonanceZero z;
    z.a = a;
    z.theta = th;
    z.residual = h;
    z.jacobian = map.jacobian(a, th);
    z.det = z.jacobian.determinant();
    found[idx] = z;
  });

  const double max_norm = *std::max_element(seed_norm.begin(), seed_norm.end());
  if (max_norm <= 1e-12) {
    map.degenerate = true;
    map.log.push_back("H vanishes on the whole seed grid: no isolated zeros");
    return map;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!notes[i].empty()) map.log.push_back(notes[i]);
    if (!found[i]) continue;
    const ResonanceZero& z = *found[i];
    const bool dup = std::any_of(map.zeros.begin(), map.zeros.end(), [&](const ResonanceZero& o) {
      const double dth = std::abs(wrap_angle(o.theta - z.theta));
      return std::abs(o.a - z.a) < 1e-6 && dth < 1e-6;
    });
    if (!dup) map.zeros.push_back(z);
  }
  std::sort(map.zeros.begin(), map.zeros.end(), [](const ResonanceZero& x, const ResonanceZero& y) {
    return x.a != y.a ? x.a < y.a : x.theta < y.theta;
  });
  return map;
}

PlanarRegion resonance_box(double a0, double theta0, double half_width) {
  const double h = half_width;
  return PlanarRegion::polygon({Vec2(a0 - h, theta0 - h), Vec2(a0 + h, theta0 - h),
                                Vec2(a0 + h, theta0 + h), Vec2(a0 - h, theta0 + h)})
      .with_star_center(Vec2(a0, theta0));
}

Vec2 resonance_xi(double a, double theta) {
  return Vec2(-a * std::cos(theta), a * std::sin(theta));
}

PlanarRegion resonance_image_region(double a0, double theta0, double half_width, int resolution) {
  const PlanarRegion box = resonance_box(a0, theta0, half_width);
  return PlanarRegion::curve(
             [box](double u) {
               const Vec2 p = box.point(1.0 - u);
               return resonance_xi(p.x(), p.y());
             },
             resolution)
      .with_star_center(resonance_xi(a0, theta0));
}

}  // namespace smallpar
