#include "smallpar/variational.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace smallpar {

namespace {

// (x, y) with x' = psi, y' = phi + psi' y.
Rhs coupled_eta_rhs(const SystemDef& sys) {
  const int k = sys.k;
  return [&sys, k, x = Vec(k), y = Vec(k), f = Vec(k), a = Mat(k, k)](
             double t, const Vec& s, Vec& ds) mutable {
    x = s.head(k);
    y = s.tail(k);
    sys.psi(t, x, f);
    ds.head(k) = f;
    sys.phi(t, x, f);
    sys.psi_jac(t, x, a);
    ds.tail(k) = f + a * y;
  };
}

}  // namespace

Vec EtaSolution::y(double t) const {
  const Trajectory& tr = (t >= s) ? forward : backward;
  const int k = static_cast<int>(xi.size());
  return tr(t).tail(k);
}

Vec EtaSolution::omega(double t) const {
  const Trajectory& tr = (t >= s) ? forward : backward;
  const int k = static_cast<int>(xi.size());
  return tr(t).head(k);
}

EtaSolution eta(const SystemDef& sys, double s, const Vec& xi,
                std::span<const double> eval_times, const IntegratorConfig& cfg) {
  if (xi.size() != sys.k) throw Error("eta: state dimension mismatch");
  const int k = sys.k;
  double t_hi = s, t_lo = s;
  for (double t : eval_times) {
    t_hi = std::max(t_hi, t);
    t_lo = std::min(t_lo, t);
  }

  Vec start(2 * k);
  start.head(k) = flow_omega(sys, s, 0.0, xi, cfg);
  start.tail(k).setZero();

  EtaSolution sol;
  sol.xi = xi;
  sol.s = s;
  const Rhs rhs_f = coupled_eta_rhs(sys);
  const Rhs rhs_b = coupled_eta_rhs(sys);
  sol.forward = integrate(rhs_f, s, t_hi, start, cfg);
  sol.backward = integrate(rhs_b, s, t_lo, start, cfg);
  sol.times.assign(eval_times.begin(), eval_times.end());
  sol.values.reserve(eval_times.size());
  for (double t : eval_times) sol.values.push_back(t == s ? Vec::Zero(k) : sol.y(t));
  return sol;
}

Vec eta_defect_direct(const SystemDef& sys, double s, const Vec& xi,
                      const IntegratorConfig& cfg) {
  const double times[2] = {0.0, sys.period};
  const EtaSolution sol = eta(sys, s, xi, times, cfg);
  return sol.values[1] - sol.values[0];
}

DefectProfile::DefectProfile(const SystemDef& sys, const Vec& xi, const IntegratorConfig& cfg)
    : k_(sys.k), period_(sys.period), xi_(xi) {
  if (xi.size() != sys.k) throw Error("DefectProfile: state dimension mismatch");
  const int k = k_;
  const int n = k + k * k + k;
  Rhs rhs = [&sys, k, x = Vec(k), f = Vec(k), a = Mat(k, k), z = Mat(k, k)](
                double t, const Vec& s, Vec& ds) mutable {
    x = s.head(k);
    z = Eigen::Map<const Mat>(s.data() + k, k, k);
    sys.psi(t, x, f);
    ds.head(k) = f;
    sys.psi_jac(t, x, a);
    Eigen::Map<Mat>(ds.data() + k, k, k) = -z * a;
    sys.phi(t, x, f);
    ds.tail(k) = z * f;
  };
  Vec start = Vec::Zero(n);
  start.head(k) = xi;
  Eigen::Map<Mat>(start.data() + k, k, k).setIdentity();
  traj_ = integrate(rhs, 0.0, period_, start, cfg);

  const Vec end = traj_.back();
  const Mat z_t = Eigen::Map<const Mat>(end.data() + k, k, k);
  y_t_ = z_t.partialPivLu().inverse();
  g_t_ = end.tail(k);
}

Vec DefectProfile::operator()(double s) const {
  if (s < -1e-12 * period_ || s > period_ * (1.0 + 1e-12))
    throw Error("DefectProfile: anchor s outside [0, T]");
  s = std::clamp(s, 0.0, period_);
  const Vec g_s = traj_(s).tail(k_);
  return y_t_ * (g_t_ - g_s) + g_s;
}

Vec DefectProfile::omega_T() const { return traj_.back().head(k_); }

std::function<Vec(const Vec&)> eta_defect_field(const SystemDef& sys, double s,
                                                const IntegratorConfig& cfg) {
  struct Cache {
    SystemDef sys;
    IntegratorConfig cfg;
    std::mutex mu;
    std::map<std::vector<double>, std::shared_ptr<const DefectProfile>> entries;
  };
  constexpr std::size_t kCacheLimit = 8192;
  auto cache = std::make_shared<Cache>();
  cache->sys = sys;
  cache->cfg = cfg;
  return [cache, s](const Vec& xi) -> Vec {
    std::vector<double> key(xi.data(), xi.data() + xi.size());
    std::shared_ptr<const DefectProfile> prof;
    {
      std::lock_guard lock(cache->mu);
      if (auto it = cache->entries.find(key); it != cache->entries.end()) prof = it->second;
    }
    if (!prof) {
      prof = std::make_shared<const DefectProfile>(cache->sys, xi, cache->cfg);
      std::lock_guard lock(cache->mu);
      if (cache->entries.size() >= kCacheLimit) cache->entries.clear();
      cache->entries.emplace(std::move(key), prof);
    }
    return (*prof)(s);
  };
}

MonodromyReport analyse_monodromy(Mat m, double trace_integral, const FloquetThresholds& thr) {
  MonodromyReport rep;
  Eigen::EigenSolver<Mat> es(m, false);
  if (es.info() != Eigen::Success) throw Error("monodromy: eigenvalue solver failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  rep.multipliers.assign(ev.data(), ev.data() + ev.size());
  std::sort(rep.multipliers.begin(), rep.multipliers.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
              return std::arg(a) < std::arg(b);
            });
  const std::size_t n = rep.multipliers.size();
  rep.simple.assign(n, true);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && std::abs(rep.multipliers[i] - rep.multipliers[j]) < thr.gap_tol)
        rep.simple[i] = false;
  rep.trace_integral = trace_integral;
  rep.determinant = m.determinant();
  const double expected = std::exp(trace_integral);
  rep.liouville_error = std::abs(rep.determinant - expected) / expected;
  rep.matrix = std::move(m);
  return rep;
}

MonodromyReport monodromy(const LinearCoefficient& a, int k, double period,
                          const IntegratorConfig& cfg, const FloquetThresholds& thr) {
  if (k <= 0 || !(period > 0)) throw Error("monodromy: invalid dimension or period");
  Rhs rhs = [&a, k, am = Mat(k, k)](double t, const Vec& s, Vec& ds) mutable {
    a(t, am);
    if (!am.allFinite()) throw Error("monodromy: non-finite coefficient at t = " + std::to_string(t));
    Eigen::Map<Mat>(ds.data(), k, k) = am * Eigen::Map<const Mat>(s.data(), k, k);
    ds[k * k] = am.trace();
  };
  Vec start = Vec::Zero(k * k + 1);
  Eigen::Map<Mat>(start.data(), k, k).setIdentity();
  const Vec end = integrate(rhs, 0.0, period, start, cfg).back();
  return analyse_monodromy(Eigen::Map<const Mat>(end.data(), k, k), end[k * k], thr);
}

Vec periodic_eval(const Trajectory& cycle, double t) {
  const double t0 = cycle.t_min();
  const double len = cycle.t_max() - t0;
  double u = std::fmod(t - t0, len);
  if (u < 0) u += len;
  return cycle(t0 + u);
}

Trajectory unperturbed_cycle(const SystemDef& sys, const Vec& x0, const IntegratorConfig& cfg,
                             double periodicity_tol) {
  Trajectory tr = flow_omega_dense(sys, sys.period, 0.0, x0, cfg);
  const double res = (tr.back() - tr.front()).norm();
  if (!(res <= periodicity_tol))
    throw NonPeriodicCycle("cycle start is not T-periodic under psi: residual " +
                           std::to_string(res));
  return tr;
}

std::vector<FloquetPhaseReport> floquet_condition_A3(const SystemDef& sys,
                                                     const Trajectory& cycle,
                                                     std::span<const double> theta_grid,
                                                     const IntegratorConfig& cfg,
                                                     const FloquetThresholds& thr,
                                                     double periodicity_tol) {
  const int k = sys.k;
  if (cycle.dim() != k) throw Error("floquet_condition_A3: cycle dimension mismatch");
  if (std::abs(cycle.t_max() - cycle.t_min() - sys.period) > 1e-9 * sys.period)
    throw NonPeriodicCycle("floquet_condition_A3: cycle must span exactly one period");
  const double res = (cycle.back() - cycle.front()).norm();
  if (!(res <= periodicity_tol))
    throw NonPeriodicCycle("floquet_condition_A3: cycle residual " + std::to_string(res) +
                           " exceeds tolerance");

  std::vector<FloquetPhaseReport> out(theta_grid.size());
  parallel_for(theta_grid.size(), [&](std::size_t i) {
    const double theta = theta_grid[i];
    Rhs rhs = [&sys, k, theta, x = Vec(k), f = Vec(k), a = Mat(k, k)](
                  double t, const Vec& s, Vec& ds) mutable {
      x = s.head(k);
      sys.psi(t + theta, x, f);
      ds.head(k) = f;
      sys.psi_jac(t, x, a);
      Eigen::Map<Mat>(ds.data() + k, k, k) = a * Eigen::Map<const Mat>(s.data() + k, k, k);
      ds[k + k * k] = a.trace();
    };
    Vec start = Vec::Zero(k + k * k + 1);
    start.head(k) = periodic_eval(cycle, theta);
    Eigen::Map<Mat>(start.data() + k, k, k).setIdentity();
    const Vec end = integrate(rhs, 0.0, sys.period, start, cfg).back();

    FloquetPhaseReport rep;
    rep.theta = theta;
    rep.monodromy =
        analyse_monodromy(Eigen::Map<const Mat>(end.data() + k, k, k), end[k + k * k], thr);
    const auto& mus = rep.monodromy.multipliers;
    std::size_t best = 0;
    for (std::size_t j = 1; j < mus.size(); ++j)
      if (std::abs(mus[j] - 1.0) < std::abs(mus[best] - 1.0)) best = j;
    rep.closest_to_one = mus[best];
    rep.distance_to_one = std::abs(mus[best] - 1.0);
    rep.gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < mus.size(); ++j)
      if (j != best) rep.gap = std::min(rep.gap, std::abs(mus[j] - 1.0));
    rep.one_is_multiplier = rep.distance_to_one <= thr.one_tol;
    rep.simple = rep.one_is_multiplier && rep.gap >= thr.gap_tol;
    out[i] = std::move(rep);
  });
  return out;
}

}  // namespace smallpar
