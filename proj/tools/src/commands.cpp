#include "smallpar/cli/commands.hpp"

#include "smallpar/averaging.hpp"
#include "smallpar/cli/builtins.hpp"
#include "smallpar/conditions.hpp"
#include "smallpar/periodic.hpp"
#include "smallpar/variational.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace smallpar::cli {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<std::string> state_columns(const std::string& prefix, int k) {
  std::vector<std::string> out;
  for (int i = 1; i <= k; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void append(std::vector<double>& row, const Vec& v) { row.insert(row.end(), v.data(), v.data() + v.size()); }

void append(std::vector<std::string>& cols, const std::vector<std::string>& more) {
  cols.insert(cols.end(), more.begin(), more.end());
}

// The whole analysis context shared by the commands.
struct Context {
  const RunConfig& cfg;
  IntegratorConfig icfg;
  ConditionTolerances tol;
  ConditionGrids grids;

  explicit Context(const RunConfig& c)
      : cfg(c), icfg(build_integrator(c)), tol(build_tolerances(c)), grids(build_grids(c)) {}

  SystemDef system() const { return build_system(cfg); }
  ProductRegion region(int k) const { return build_region(cfg, k); }
  std::vector<double> thetas(double period) const {
    return uniform_grid(0.0, period, grids.theta_points);
  }

  Trajectory cycle(const SystemDef& sys) const {
    const auto start = cfg.vector("cycle", "start");
    if (!start) throw ConfigError("missing required key 'start' in [cycle]");
    if (start->size() != sys.k)
      throw ConfigError("[cycle] start must have k = " + std::to_string(sys.k) + " entries");
    const double ptol = cfg.number("tolerances", "periodicity", 1e-6);
    try {
      return unperturbed_cycle(sys, *start, icfg, ptol);
    } catch (const NonPeriodicCycle& e) {
      throw ConfigError(std::string("[cycle] start: ") + e.what());
    }
  }

  Vec vector_or(const std::string& section, const std::string& key, const Vec& fallback, int k) const {
    const auto v = cfg.vector(section, key);
    if (!v) return fallback;
    if (v->size() != k)
      throw ConfigError("[" + section + "] " + key + " must have k = " + std::to_string(k) + " entries");
    return *v;
  }
};

CommandResult from_report(const HypothesisReport& rep) {
  CommandResult r;
  r.table = rep.table;
  r.verdict = rep.summary;
  r.exit_code = exit_code(rep.verdict);
  for (const auto& [key, value] : rep.settings) r.comments.push_back(key + " = " + format_number(value));
  if (rep.witness) {
    std::string w = "witness point";
    for (Eigen::Index i = 0; i < rep.witness->point.size(); ++i)
      w += (i ? ", " : " (") + format_number(rep.witness->point[i]);
    w += rep.witness->point.size() ? ")" : "";
    if (!std::isnan(rep.witness->parameter)) w += " parameter " + format_number(rep.witness->parameter);
    if (!rep.witness->note.empty()) w += ": " + rep.witness->note;
    r.comments.push_back(w);
  }
  return r;
}

int last_column(const Table& t) { return static_cast<int>(t.columns.size()) - 1; }

CommandResult check(const Context& ctx, const std::string& condition) {
  const SystemDef sys = ctx.system();
  if (condition == "A3") {
    const Trajectory cyc = ctx.cycle(sys);
    const auto th = ctx.thetas(sys.period);
    CommandResult r = from_report(check_A3(sys, cyc, th, ctx.tol, ctx.icfg));
    const int n = last_column(r.table);
    r.plot = plot_columns(r.table, 0, {n - 2, n - 1}, "Floquet multipliers along the cycle");
    return r;
  }
  const ProductRegion region = ctx.region(sys.k);
  if (condition == "A0") {
    CommandResult r = from_report(check_A0(sys, region, ctx.grids.boundary_samples, ctx.tol, ctx.icfg));
    r.plot = plot_columns(r.table, -1, {last_column(r.table)}, "A0 residual on the boundary");
    return r;
  }
  if (condition == "A1") {
    const auto s = uniform_grid(0.0, sys.period, ctx.grids.s_points);
    CommandResult r =
        from_report(check_A1(sys, region, s, ctx.grids.boundary_samples, ctx.tol, ctx.icfg));
    r.plot = plot_columns(r.table, -1, {last_column(r.table) - 1}, "A1 minimal period defect");
    return r;
  }
  if (condition == "A2") {
    const A2Result a2 = check_A2(sys, region, ctx.grids.boundary_samples, build_winding(ctx.cfg), ctx.icfg);
    CommandResult r = from_report(a2.report);
    if (a2.degree_refined)
      r.comments.push_back("refined degree " + std::to_string(a2.degree_refined->degree) + " with " +
                           std::to_string(a2.degree_refined->samples_used) + " samples");
    if (r.table.columns.size() == 5) r.plot = plot_columns(r.table, 0, {3, 4}, "period defect along the boundary");
    return r;
  }
  throw ConfigError("check expects A0, A1, A2 or A3, got '" + condition + "'");
}

CommandResult melnikov(const Context& ctx) {
  const SystemDef sys = ctx.system();
  const Trajectory cyc = ctx.cycle(sys);
  const MelnikovProfile prof = melnikov_profile(sys, cyc, ctx.thetas(sys.period), ctx.grids.quadrature_panels);
  CommandResult r = from_report(check_A3_1(prof, ctx.tol));
  r.comments.push_back("weight range [" + format_number(prof.weight_min) + ", " +
                       format_number(prof.weight_max) + "]");
  r.plot = plot_columns(r.table, 0, {1}, "Melnikov integral M(theta)");
  return r;
}

CommandResult degree(const Context& ctx) {
  const WindingOptions wopt = build_winding(ctx.cfg);
  PlanarField field;
  PlanarRegion region = PlanarRegion::circle(Vec2::Zero(), 1.0);
  std::string what;
  if (ctx.cfg.has("degree", "field1") || ctx.cfg.has("degree", "field2")) {
    const expr::ParamMap params = build_parameters(ctx.cfg);
    expr::VectorExpr f;
    try {
      f = expr::VectorExpr::parse({ctx.cfg.require("degree", "field1"), ctx.cfg.require("degree", "field2")},
                                  params);
      f.validate(2);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("[degree] ") + e.what());
    }
    const expr::CompiledVector cf(f, 2);
    field = [cf](const Vec2& p) {
      Vec out(2);
      cf.eval(0.0, Vec(p), out);
      return Vec2(out[0], out[1]);
    };
    region = ctx.region(2).factors.front();
    what = "user field";
  } else {
    const SystemDef sys = ctx.system();
    const ProductRegion pr = ctx.region(sys.k);
    if (!pr.planar()) throw ConfigError("degree expects a planar region; use check A2 for products");
    region = pr.factors.front();
    const double s = ctx.cfg.number("degree", "anchor", 0.0);
    auto defect = eta_defect_field(sys, s, ctx.icfg);
    field = [defect](const Vec2& p) {
      const Vec d = defect(Vec(p));
      return Vec2(d[0], d[1]);
    };
    what = "period defect at s = " + format_number(s);
  }

  CommandResult r;
  r.table.columns = {"u", "x1", "x2", "F1", "F2"};
  try {
    const int n = wopt.initial_samples;
    const auto pts = region.sample(n);
    std::vector<Vec2> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { vals[i] = field(pts[i]); });
    for (std::size_t i = 0; i < pts.size(); ++i)
      r.table.rows.push_back({static_cast<double>(i) / n, pts[i].x(), pts[i].y(), vals[i].x(), vals[i].y()});
    const DegreeReport d = winding_number(field, region, wopt);
    r.verdict = "degree " + std::to_string(d.degree) + " (" + what + ", min |F| " + num(d.min_field_norm) +
                ", " + std::to_string(d.samples_used) + " samples)";
    r.comments.push_back("total angle = " + format_number(d.total_angle));
    r.exit_code = kHolds;
  } catch (const FieldVanishes& e) {
    r.verdict = std::string("degree inconclusive (") + e.what() + ")";
    r.exit_code = kInconclusive;
  } catch (const NonConvergent& e) {
    r.verdict = std::string("degree inconclusive (") + e.what() + ")";
    r.exit_code = kInconclusive;
  } catch (const IntegrationError& e) {
    r.verdict = std::string("degree inconclusive (integration failed: ") + e.what() + ")";
    r.exit_code = kInconclusive;
  }
  r.plot = plot_columns(r.table, 0, {3, 4}, "field along the boundary (" + what + ")");
  return r;
}

CommandResult resonance(const Context& ctx) {
  const expr::ParamMap params = build_parameters(ctx.cfg);
  std::string forcing;
  if (const auto f = ctx.cfg.text("resonance", "forcing")) {
    forcing = *f;
  } else if (ctx.cfg.text("system", "builtin") == std::optional<std::string>("e2-resonance")) {
    forcing = "(1 - x1^2)*x2 + lambda*cos(t)";
  } else {
    throw ConfigError("missing required key 'forcing' in [resonance]");
  }
  std::set<std::string> names;
  for (const auto& [k, v] : params) names.insert(k);
  expr::Expr f;
  try {
    f = expr::parse(forcing, names);
  } catch (const Error& e) {
    throw ConfigError(std::string("[resonance] forcing: ") + e.what());
  }
  if (f.state_dimension() > 2) throw ConfigError("[resonance] forcing may only use x1 and x2");
  const ResonanceOptions opt = build_resonance(ctx.cfg);
  const double h = ctx.cfg.number("resonance", "box_half_width", 0.2);
  const ResonanceMap map = resonance_H(f, params, opt);

  CommandResult r;
  r.comments.push_back("forcing f(t, u, v) = " + forcing + " with u = x1, v = x2");
  for (const auto& line : map.log) r.comments.push_back(line);
  r.table.columns = {"a", "theta", "H1", "H2", "det", "box_degree"};
  std::vector<int> degrees(map.zeros.size(), 0);
  std::vector<bool> ok(map.zeros.size(), false);
  parallel_for(map.zeros.size(), [&](std::size_t i) {
    const auto& z = map.zeros[i];
    try {
      degrees[i] = winding_number([&map](const Vec2& p) { return map(p.x(), p.y()); },
                                  resonance_box(z.a, z.theta, h))
                       .degree;
      ok[i] = true;
    } catch (const Error&) {
    }
  });
  for (std::size_t i = 0; i < map.zeros.size(); ++i) {
    const auto& z = map.zeros[i];
    r.table.rows.push_back({z.a, z.theta, z.residual.x(), z.residual.y(), z.det,
                            ok[i] ? degrees[i] : std::nan("")});
  }

  const ResonanceZero* primary = nullptr;
  std::size_t pi = 0;
  for (std::size_t i = 0; i < map.zeros.size(); ++i)
    if (std::abs(map.zeros[i].det) > 1e-8) {
      primary = &map.zeros[i];
      pi = i;
      break;
    }
  if (map.degenerate) {
    r.verdict = "resonance inconclusive (H vanishes identically on the seed grid)";
    r.exit_code = kInconclusive;
  } else if (map.zeros.empty()) {
    r.verdict = "resonance fails (no zero of H in the searched range)";
    r.exit_code = kFails;
  } else if (!primary) {
    r.verdict = "resonance inconclusive (every zero has a singular H')";
    r.exit_code = kInconclusive;
  } else {
    const int sign = primary->det > 0 ? 1 : -1;
    const bool agrees = ok[pi] && degrees[pi] == sign;
    r.verdict = "resonance: " + std::to_string(map.zeros.size()) + " zero(s); (a, theta) = (" +
                num(primary->a) + ", " + num(primary->theta) + "), det H' = " + num(primary->det) +
                ", deg(H, box) = " + (ok[pi] ? std::to_string(degrees[pi]) : std::string("n/a")) +
                (agrees ? "" : " (differs from sign det H')");
    r.exit_code = agrees ? kHolds : kInconclusive;
  }

  Plot p;
  p.title = "H(a, theta) at theta = " + num(primary ? primary->theta : opt.theta_min);
  p.x_label = "a";
  Series s1{"H1", {}, {}}, s2{"H2", {}, {}};
  const double th = primary ? primary->theta : opt.theta_min;
  for (double a : uniform_grid(opt.a_min, opt.a_max, 201)) {
    const Vec2 v = map(a, th);
    s1.x.push_back(a);
    s1.y.push_back(v.x());
    s2.x.push_back(a);
    s2.y.push_back(v.y());
  }
  p.series = {s1, s2};
  r.plot = p;
  return r;
}

Plot trend_plot(const std::vector<double>& trend) {
  Plot p;
  p.title = "averaged field: |Phi_n - Phi_2n|";
  p.x_label = "n";
  p.y_label = "max over samples";
  p.log_x = p.log_y = true;
  Series s{"trend", {}, {}};
  for (std::size_t i = 0; i < trend.size(); ++i) {
    s.x.push_back(std::ldexp(1.0, static_cast<int>(i)));
    s.y.push_back(trend[i]);
  }
  p.series.push_back(std::move(s));
  return p;
}

CommandResult average(const Context& ctx) {
  const SystemDef sys = ctx.system();
  const Vec center = ctx.vector_or("averaging", "center", Vec::Zero(sys.k), sys.k);
  const double radius = ctx.cfg.number("averaging", "radius", 1.0);
  CommandResult r;
  const StandardForm sf(sys, ctx.icfg);
  try {
    if (sf.periodicity_warning(center))
      r.comments.push_back("warning: the change of variable z = Omega(0, t, x) is not T-periodic at the center (gap " +
                           format_number(sf.periodicity_gap(center)) + "); the averaged field need not exist");
  } catch (const IntegrationError& e) {
    r.comments.push_back(std::string("warning: periodicity of Omega not checked (") + e.what() + ")");
  }
  try {
    const AveragedField field = averaged_field(sys, center, radius, build_averaging(ctx.cfg), ctx.icfg);
    auto& cols = r.table.columns;
    append(cols, state_columns("xi", sys.k));
    append(cols, state_columns("Phi", sys.k));
    append(cols, state_columns("mean_phi", sys.k));
    cols.push_back("estimate");
    std::vector<Vec> phi(field.samples.size());
    parallel_for(phi.size(), [&](std::size_t i) { phi[i] = field(field.samples[i]); });
    double worst = 0.0;
    for (std::size_t i = 0; i < field.samples.size(); ++i) {
      std::vector<double> row;
      append(row, field.samples[i]);
      append(row, phi[i]);
      append(row, time_average(sys, field.samples[i], ctx.grids.quadrature_panels));
      row.push_back(field.estimates[i]);
      worst = std::max(worst, field.estimates[i]);
      r.table.rows.push_back(std::move(row));
    }
    r.verdict = "averaging converged (n_used = " + std::to_string(field.n_used) +
                ", max |Phi_n - Phi_2n| = " + num(worst) + " over " +
                std::to_string(field.samples.size()) + " samples)";
    r.exit_code = kHolds;
    r.plot = trend_plot(field.trend);
  } catch (const NoConvergence& e) {
    r.table.columns = {"n", "max_change"};
    for (std::size_t i = 0; i < e.trend().size(); ++i)
      r.table.rows.push_back({std::ldexp(1.0, static_cast<int>(i)), e.trend()[i]});
    r.verdict = std::string("averaging fails (") + e.what() + ")";
    r.exit_code = kFails;
    r.plot = trend_plot(e.trend());
  }
  return r;
}

CommandResult verify_cauchy(const Context& ctx) {
  const SystemDef sys = ctx.system();
  const Vec xi0 = ctx.vector_or("averaging", "xi0", Vec::Zero(sys.k), sys.k);
  const Vec center = ctx.vector_or("averaging", "center", xi0, sys.k);
  const double radius = ctx.cfg.number("averaging", "radius", 1.0);
  const double d = ctx.cfg.number("averaging", "d", 1.0);
  const double gamma = ctx.cfg.number("averaging", "gamma_tol", 0.1);
  const auto eps_list = ctx.cfg.list("averaging", "eps_list", {0.01, 0.005});
  Theorem4Options opt;
  opt.grid_points = ctx.cfg.integer("grids", "time_points", opt.grid_points);

  CommandResult r;
  std::vector<CauchyVerdict> verdicts;
  try {
    const AveragedField field = averaged_field(sys, center, radius, build_averaging(ctx.cfg), ctx.icfg);
    verdicts = verify_theorem4(sys, field, xi0, d, eps_list, gamma, ctx.icfg, opt);
  } catch (const NoConvergence& e) {
    r.verdict = std::string("verify-cauchy inconclusive (") + e.what() + ")";
    r.exit_code = kInconclusive;
    r.table.columns = {"n", "max_change"};
    for (std::size_t i = 0; i < e.trend().size(); ++i)
      r.table.rows.push_back({std::ldexp(1.0, static_cast<int>(i)), e.trend()[i]});
    return r;
  } catch (const LeftValidatedBall& e) {
    r.verdict = std::string("verify-cauchy inconclusive (") + e.what() + ")";
    r.exit_code = kInconclusive;
    return r;
  }

  r.table.columns = {"eps", "t"};
  append(r.table.columns, state_columns("x_eps", sys.k));
  append(r.table.columns, state_columns("approx", sys.k));
  r.table.columns.push_back("error");
  Plot p;
  p.title = "|x_eps(t) - Omega(t, 0, z(eps t))|";
  p.x_label = "eps t";
  bool all = true;
  std::string sups;
  for (const auto& v : verdicts) {
    Series s{"eps = " + format_number(v.eps), {}, {}};
    for (std::size_t j = 0; j < v.times.size(); ++j) {
      std::vector<double> row{v.eps, v.times[j]};
      append(row, v.x_eps[j]);
      append(row, v.approx[j]);
      row.push_back(v.errors[j]);
      r.table.rows.push_back(std::move(row));
      s.x.push_back(v.eps * v.times[j]);
      s.y.push_back(v.errors[j]);
    }
    p.series.push_back(std::move(s));
    all = all && v.pass;
    sups += (sups.empty() ? "" : ", ") + num(v.sup_error) + " at eps = " + num(v.eps);
    r.comments.push_back("eps = " + format_number(v.eps) + ": sup error " + format_number(v.sup_error) +
                         (v.pass ? " (pass)" : " (fail)"));
  }
  for (std::size_t i = 1; i < verdicts.size(); ++i)
    r.comments.push_back("sup error ratio eps = " + format_number(verdicts[i - 1].eps) + " / " +
                         format_number(verdicts[i].eps) + ": " +
                         format_number(verdicts[i - 1].sup_error / verdicts[i].sup_error));
  r.verdict = std::string("Cauchy estimate ") + (all ? "holds" : "fails") + " (sup error " + sups +
              "; gamma_tol " + num(gamma) + ")";
  r.exit_code = all ? kHolds : kFails;
  r.plot = p;
  return r;
}

// Cycle point where |M| is largest; the region center without a cycle.
Vec default_seed(const Context& ctx, const SystemDef& sys, const Trajectory* cyc,
                 const std::optional<ProductRegion>& region) {
  if (cyc) {
    const auto th = ctx.thetas(sys.period);
    const MelnikovProfile prof = melnikov_profile(sys, *cyc, th, ctx.grids.quadrature_panels);
    std::size_t best = 0;
    for (std::size_t i = 1; i < prof.values.size(); ++i)
      if (std::abs(prof.values[i]) > std::abs(prof.values[best])) best = i;
    return periodic_eval(*cyc, th[best]);
  }
  if (region) return region->center();
  return Vec::Zero(sys.k);
}

Plot orbit_plot(const SystemDef& sys, const Trajectory& orbit, const Trajectory* cyc, double eps) {
  Plot p;
  p.title = "periodic orbit at eps = " + format_number(eps);
  auto trace = [&](const Trajectory& tr, std::string name) {
    Series s{std::move(name), {}, {}};
    for (double t : uniform_grid(0.0, sys.period, 513)) {
      const Vec x = tr(t);
      s.x.push_back(sys.k >= 2 ? x[0] : t);
      s.y.push_back(sys.k >= 2 ? x[1] : x[0]);
    }
    return s;
  };
  p.x_label = sys.k >= 2 ? "x1" : "t";
  p.y_label = sys.k >= 2 ? "x2" : "x1";
  p.series.push_back(trace(orbit, "orbit"));
  if (cyc) p.series.push_back(trace(*cyc, "unperturbed cycle"));
  return p;
}

std::vector<std::string> orbit_columns(int k, int multipliers) {
  std::vector<std::string> cols{"eps"};
  append(cols, state_columns("xi", k));
  append(cols, {"residual", "iterations"});
  for (int i = 1; i <= multipliers; ++i) {
    cols.push_back("mu" + std::to_string(i) + "_re");
    cols.push_back("mu" + std::to_string(i) + "_im");
  }
  append(cols, {"converged", "in_X", "dist_to_boundary", "dist_to_cycle"});
  return cols;
}

std::vector<double> orbit_row(const PeriodicOrbitResult& o, int k) {
  const double nan = std::nan("");
  std::vector<double> row{o.eps};
  if (o.converged) {
    append(row, o.xi);
  } else {
    row.insert(row.end(), static_cast<std::size_t>(k), nan);
  }
  row.push_back(o.residual);
  row.push_back(o.iterations);
  for (int i = 0; i < k; ++i) {
    const bool has = static_cast<std::size_t>(i) < o.multipliers.size();
    row.push_back(has ? o.multipliers[static_cast<std::size_t>(i)].real() : nan);
    row.push_back(has ? o.multipliers[static_cast<std::size_t>(i)].imag() : nan);
  }
  row.push_back(o.converged ? 1 : 0);
  row.push_back(o.in_X ? (*o.in_X ? 1 : 0) : nan);
  row.push_back(o.dist_to_boundary);
  row.push_back(o.dist_to_cycle);
  return row;
}

CommandResult find_periodic(const Context& ctx) {
  const SystemDef sys = ctx.system();
  std::optional<ProductRegion> region;
  if (ctx.cfg.has("region", "shape")) region = ctx.region(sys.k);
  std::optional<Trajectory> cyc;
  if (ctx.cfg.has("cycle", "start")) cyc = ctx.cycle(sys);
  const double eps = ctx.cfg.number("periodic", "eps", 1e-3);
  if (!(eps >= 0)) throw ConfigError("[periodic] eps must be non-negative");
  const Vec seed = ctx.cfg.has("periodic", "seed")
                       ? ctx.vector_or("periodic", "seed", Vec(), sys.k)
                       : default_seed(ctx, sys, cyc ? &*cyc : nullptr, region);

  std::optional<Vec> fallback;
  if (ctx.cfg.has("periodic", "fallback_seed")) {
    fallback = ctx.vector_or("periodic", "fallback_seed", Vec(), sys.k);
  } else if (region) {
    fallback = region->center();
  }

  CommandResult r;
  r.table.columns = orbit_columns(sys.k, sys.k);
  PeriodicOrbitResult o;
  try {
    try {
      o = shoot(sys, eps, seed, build_shoot(ctx.cfg), ctx.icfg);
    } catch (const Error& first) {
      if (!fallback || *fallback == seed) throw;
      o = shoot(sys, eps, *fallback, build_shoot(ctx.cfg), ctx.icfg);
      o.note = "primary seed failed (" + std::string(first.what()) + "); used fallback seed";
    }
  } catch (const NewtonStalled& e) {
    r.verdict = std::string("find-periodic fails (") + e.what() + ")";
    r.exit_code = kFails;
    std::string hist = "residual history:";
    for (double v : e.residual_history()) hist += " " + format_number(v);
    r.comments.push_back(hist);
    return r;
  } catch (const SingularJacobian& e) {
    r.verdict = std::string("find-periodic inconclusive (") + e.what() + ")";
    r.exit_code = kInconclusive;
    return r;
  } catch (const IntegrationError& e) {
    r.verdict = std::string("find-periodic inconclusive (integration failed: ") + e.what() + ")";
    r.exit_code = kInconclusive;
    return r;
  }
  if (region && o.converged) {
    o.in_X = membership_X(sys, o.orbit, *region, ctx.cfg.integer("grids", "membership_points", 256), ctx.icfg).in_X;
    o.dist_to_boundary = region->distance_to_boundary(o.xi);
  }
  if (cyc && o.converged) o.dist_to_cycle = distance_to_curve(*cyc, o.xi);
  r.table.rows.push_back(orbit_row(o, sys.k));
  if (!o.note.empty()) r.comments.push_back(o.note);
  std::string where;
  for (Eigen::Index i = 0; i < o.xi.size(); ++i) where += (i ? ", " : "") + num(o.xi[i]);
  if (o.converged) {
    r.verdict = "periodic orbit converged at eps = " + num(eps) + ": xi = (" + where + "), residual " +
                num(o.residual) + ", " + std::to_string(o.iterations) + " iterations" +
                (o.in_X ? (*o.in_X ? ", in X" : ", not in X") : "") +
                (o.singular ? " (singular period-map Jacobian)" : "");
    r.exit_code = kHolds;
    r.plot = orbit_plot(sys, o.orbit, cyc ? &*cyc : nullptr, eps);
  } else {
    r.verdict = "find-periodic inconclusive (" + o.note + ")";
    r.exit_code = kInconclusive;
  }
  return r;
}

CommandResult sweep(const Context& ctx) {
  const SystemDef sys = ctx.system();
  const ProductRegion region = ctx.region(sys.k);
  std::optional<Trajectory> cyc;
  if (ctx.cfg.has("cycle", "start")) cyc = ctx.cycle(sys);
  const auto eps_list = ctx.cfg.list("periodic", "eps_list", {1e-2, 5e-3, 2.5e-3});
  for (double e : eps_list)
    if (!(e > 0)) throw ConfigError("[periodic] eps_list entries must be positive");

  SweepOptions opt;
  const std::string strategy = ctx.cfg.text("periodic", "strategy").value_or("warm");
  if (strategy == "warm") {
    opt.strategy = SeedStrategy::WarmStart;
  } else if (strategy == "fixed") {
    opt.strategy = SeedStrategy::Fixed;
  } else {
    throw ConfigError("[periodic] strategy must be warm or fixed");
  }
  opt.seed = ctx.cfg.has("periodic", "seed") ? ctx.vector_or("periodic", "seed", Vec(), sys.k)
                                              : default_seed(ctx, sys, cyc ? &*cyc : nullptr, region);
  opt.fallback_seed = ctx.vector_or("periodic", "fallback_seed", region.center(), sys.k);
  opt.shoot = build_shoot(ctx.cfg);
  opt.membership_points = ctx.cfg.integer("grids", "membership_points", opt.membership_points);

  const SweepResult res = eps_sweep(sys, region, eps_list, opt, cyc ? &*cyc : nullptr, ctx.icfg);
  CommandResult r;
  r.table.columns = orbit_columns(sys.k, sys.k);
  int converged = 0, inside = 0;
  Plot p;
  p.title = "distance of the periodic orbit to the cycle";
  p.x_label = "eps";
  p.y_label = "dist_to_cycle";
  p.log_x = p.log_y = true;
  Series s{"dist_to_cycle", {}, {}};
  for (const auto& o : res.orbits) {
    r.table.rows.push_back(orbit_row(o, sys.k));
    converged += o.converged ? 1 : 0;
    inside += o.in_X.value_or(false) ? 1 : 0;
    if (!o.note.empty()) r.comments.push_back("eps = " + format_number(o.eps) + ": " + o.note);
    s.x.push_back(o.eps);
    s.y.push_back(o.dist_to_cycle);
  }
  p.series.push_back(std::move(s));
  r.plot = p;
  const int n = static_cast<int>(res.orbits.size());
  r.verdict = "sweep: " + std::to_string(converged) + "/" + std::to_string(n) + " converged, " +
              std::to_string(inside) + " in X" +
              (cyc ? ", log-log slope of distance to cycle " + num(res.slope) : std::string());
  r.exit_code = converged == n && inside == n ? kHolds : kFails;
  return r;
}

}  // namespace

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Holds: return kHolds;
    case Verdict::Fails: return kFails;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

CommandResult run_command(const std::string& command, const std::string& condition, const RunConfig& cfg) {
  const Context ctx(cfg);
  if (command == "check") return check(ctx, condition);
  if (command == "melnikov") return melnikov(ctx);
  if (command == "degree") return degree(ctx);
  if (command == "resonance") return resonance(ctx);
  if (command == "average") return average(ctx);
  if (command == "verify-cauchy") return verify_cauchy(ctx);
  if (command == "find-periodic") return find_periodic(ctx);
  if (command == "sweep") return sweep(ctx);
  throw ConfigError("unknown command '" + command + "'");
}

void describe_system(std::ostream& out, const SystemDef& sys, const std::string& summary,
                     const std::string& notes) {
  out << "system " << sys.name << ": k = " << sys.k << ", T = " << format_number(sys.period) << "\n";
  if (!summary.empty()) out << "  " << summary << "\n";
  if (sys.parameters.empty()) {
    out << "parameters: none\n";
  } else {
    out << "parameters:";
    for (const auto& [k, v] : sys.parameters) out << " " << k << " = " << format_number(v);
    out << "\n";
  }
  if (!sys.symbolic) {
    out << "phi, psi: compiled callables"
        << (sys.finite_difference_jacobians ? " (Jacobians by central differences)" : "") << "\n";
    return;
  }
  const SymbolicSystem& s = *sys.symbolic;
  for (int i = 0; i < sys.k; ++i) out << "phi" << i + 1 << " = " << expr::print(s.phi[i]) << "\n";
  for (int i = 0; i < sys.k; ++i) out << "psi" << i + 1 << " = " << expr::print(s.psi[i]) << "\n";
  for (int i = 0; i < sys.k; ++i)
    for (int j = 0; j < sys.k; ++j)
      out << "d psi" << i + 1 << "/d x" << j + 1 << " = " << expr::print(s.psi_jacobian[i][j]) << "\n";
  out << "Sp psi' = " << expr::print(s.psi_divergence) << "\n";
  if (!notes.empty()) {
    std::istringstream in(notes);
    std::string line;
    out << "convention:\n";
    while (std::getline(in, line)) out << "  " << line << "\n";
  }
}

}  // namespace smallpar::cli
