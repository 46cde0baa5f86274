#include "smallpar/averaging.hpp"

#include "smallpar/quadrature.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace smallpar {

namespace {

Rhs eta_rhs(const SystemDef& sys) {
  const int k = sys.k;
  return [&sys, k, x = Vec(k), f = Vec(k), a = Mat(k, k)](double t, const Vec& s,
                                                          Vec& ds) mutable {
    x = s.head(k);
    sys.psi(t, x, f);
    ds.head(k) = f;
    sys.phi(t, x, f);
    sys.psi_jac(t, x, a);
    ds.tail(k) = f + a * s.tail(k);
  };
}

std::vector<Vec> ball_samples(const Vec& center, double r, int count, std::uint64_t seed) {
  std::vector<Vec> out{center};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  const auto k = center.size();
  while (static_cast<int>(out.size()) < count) {
    Vec dir(k);
    for (Eigen::Index i = 0; i < k; ++i) dir[i] = gauss(rng);
    const double nrm = dir.norm();
    if (nrm == 0) continue;
    const double rad = r * std::pow(unif(rng), 1.0 / static_cast<double>(k));
    out.push_back(center + rad * dir / nrm);
  }
  return out;
}

}  // namespace

std::vector<Vec> eta_backward(const SystemDef& sys, const Vec& xi, const std::vector<int>& ns,
                              const IntegratorConfig& cfg) {
  if (xi.size() != sys.k) throw Error("eta_backward: state dimension mismatch");
  const int k = sys.k;
  const Rhs rhs = eta_rhs(sys);
  Vec state(2 * k);
  state.head(k) = xi;
  state.tail(k).setZero();
  std::vector<Vec> out;
  int done = 0;
  for (int n : ns) {
    if (n < done) throw Error("eta_backward: period counts must be increasing");
    for (; done < n; ++done) {
      const double t0 = -done * sys.period;
      state = integrate(rhs, t0, t0 - sys.period, state, cfg).back();
    }
    out.push_back(state.tail(k));
  }
  return out;
}

AveragedField AveragedField::from_function(std::function<Vec(const Vec&)> f, int k, Vec center,
                                           double radius) {
  AveragedField a;
  a.k = k;
  a.center = std::move(center);
  a.radius = radius;
  a.eval_ = std::move(f);
  return a;
}

Vec AveragedField::operator()(const Vec& xi) const {
  if (!eval_) throw Error("AveragedField: not initialised");
  return eval_(xi);
}

Mat AveragedField::jacobian(const Vec& xi) const {
  return finite_difference_jacobian([this](double, const Vec& x, Vec& out) { out = (*this)(x); },
                                    0.0, xi);
}

AveragedField averaged_field(const SystemDef& sys, const Vec& center, double radius,
                             const AveragingOptions& opt, const IntegratorConfig& cfg) {
  if (center.size() != sys.k) throw Error("averaged_field: center dimension mismatch");
  if (!(radius > 0)) throw Error("averaged_field: radius must be positive");
  if (opt.n_max < 2) throw Error("averaged_field: n_max must be at least 2");
  const int k = sys.k;
  const double T = sys.period;
  const auto pts = ball_samples(center, radius, opt.samples, opt.seed);
  const std::size_t m = pts.size();

  std::vector<Vec> state(m);
  std::vector<int> reached(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    state[i].resize(2 * k);
    state[i].head(k) = pts[i];
    state[i].tail(k).setZero();
  }
  std::vector<double> trend;
  auto phi_n = [&](int n) {
    std::vector<Vec> phi(m);
    parallel_for(m, [&](std::size_t i) {
      const Rhs local = eta_rhs(sys);
      for (; reached[i] < n; ++reached[i]) {
        const double t0 = -reached[i] * T;
        state[i] = integrate(local, t0, t0 - T, state[i], cfg).back();
      }
      phi[i] = -state[i].tail(k) / (n * T);
    });
    return phi;
  };

  AveragedField field;
  field.k = k;
  field.center = center;
  field.radius = radius;
  field.samples = pts;
  int n = 1;
  try {
    std::vector<Vec> prev = phi_n(1);
    for (;;) {
      if (2 * n > opt.n_max) {
        std::ostringstream os;
        os << "averaged field did not converge up to n = " << opt.n_max << " (last |Phi_n - Phi_2n| = "
           << (trend.empty() ? 0.0 : trend.back()) << ")";
        throw NoConvergence(os.str(), trend);
      }
      std::vector<Vec> next = phi_n(2 * n);
      std::vector<double> est(m);
      double worst = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        est[i] = (prev[i] - next[i]).norm();
        worst = std::max(worst, std::isfinite(est[i]) ? est[i] : HUGE_VAL);
      }
      trend.push_back(worst);
      if (worst <= opt.phi_tol) {
        field.estimates = std::move(est);
        break;
      }
      prev = std::move(next);
      n *= 2;
    }
  } catch (const IntegrationError& e) {
    throw NoConvergence(std::string("averaged field diverges: backward integration failed (") +
                            e.what() + ")",
                        trend);
  }
  field.n_used = n;
  field.trend = trend;
  field.eval_ = [sys, n, cfg](const Vec& xi) -> Vec {
    return -eta_backward(sys, xi, {n}, cfg).front() / (n * sys.period);
  };
  return field;
}

Vec time_average(const SystemDef& sys, const Vec& xi, int panels) {
  const QuadratureGrid g = composite_gauss_legendre(0.0, sys.period, panels);
  Vec acc = Vec::Zero(sys.k), f(sys.k);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    sys.phi(g.nodes[i], xi, f);
    acc += g.weights[i] * f;
  }
  return acc / sys.period;
}

AveragedSolution solve_averaged(const AveragedField& field, const Vec& xi0, double d,
                                const IntegratorConfig& cfg) {
  if (xi0.size() != field.k) throw Error("solve_averaged: dimension mismatch");
  if (!(d >= 0)) throw Error("solve_averaged: horizon must be non-negative");
  Rhs rhs = [&field](double, const Vec& z, Vec& dz) {
    if ((z - field.center).norm() > field.radius * (1 + 1e-12)) {
      std::ostringstream os;
      os << "averaged solution left the validated ball B(center, " << field.radius
         << "); rerun averaging with a larger radius";
      throw LeftValidatedBall(os.str());
    }
    dz = field(z);
  };
  AveragedSolution sol;
  sol.z = integrate(rhs, 0.0, d, xi0, cfg);
  const std::size_t nodes = sol.z.node_count();
  const std::size_t probes = std::min<std::size_t>(nodes, 16);
  for (std::size_t p = 0; p < probes; ++p) {
    const std::size_t i = probes > 1 ? p * (nodes - 1) / (probes - 1) : 0;
    const Mat j = field.jacobian(sol.z.node_state(i));
    const double op = Eigen::JacobiSVD<Mat>(j).singularValues()(0);
    sol.lipschitz = std::max(sol.lipschitz, op);
  }
  return sol;
}

Vec flow_omega_chunked(const SystemDef& sys, double t, const Vec& xi,
                       const IntegratorConfig& cfg) {
  const Rhs rhs = full_field(sys, 0.0);
  const double T = sys.period;
  const double dir = t >= 0 ? 1.0 : -1.0;
  const long full = static_cast<long>(std::floor(std::abs(t) / T));
  Vec x = xi;
  double s = 0.0;
  for (long m = 0; m < full; ++m, s += dir * T) x = integrate(rhs, s, s + dir * T, x, cfg).back();
  if (s != t) x = integrate(rhs, s, t, x, cfg).back();
  return x;
}

std::vector<CauchyVerdict> verify_theorem4(const SystemDef& sys, const AveragedField& field,
                                           const Vec& xi0, double d,
                                           const std::vector<double>& eps_list, double gamma_tol,
                                           const IntegratorConfig& cfg,
                                           const Theorem4Options& opt) {
  if (!(d > 0)) throw Error("verify_theorem4: d must be positive");
  if (opt.grid_points < 2) throw Error("verify_theorem4: at least 2 grid points");
  for (double e : eps_list)
    if (!(e > 0)) throw Error("verify_theorem4: every eps must be positive");
  const AveragedSolution z = solve_averaged(field, xi0, d, cfg);

  std::vector<CauchyVerdict> out;
  for (double eps : eps_list) {
    CauchyVerdict v;
    v.eps = eps;
    v.xi0 = xi0;
    v.d = d;
    v.gamma_tol = gamma_tol;
    const double horizon = d / eps;
    const Trajectory x = integrate(full_field(sys, eps), 0.0, horizon, xi0, cfg);
    const std::size_t n = static_cast<std::size_t>(opt.grid_points);
    v.times = uniform_grid(0.0, horizon, opt.grid_points);
    v.x_eps.resize(n);
    v.approx.resize(n);
    v.errors.resize(n);
    parallel_for(n, [&](std::size_t j) {
      const double t = v.times[j];
      v.x_eps[j] = x(t);
      v.approx[j] = flow_omega_chunked(sys, t, z.z(std::min(eps * t, d)), cfg);
      v.errors[j] = (v.x_eps[j] - v.approx[j]).norm();
    });
    v.sup_error = *std::max_element(v.errors.begin(), v.errors.end());
    v.pass = v.sup_error <= gamma_tol;
    out.push_back(std::move(v));
  }
  return out;
}

StandardForm::StandardForm(SystemDef sys, IntegratorConfig cfg)
    : sys_(std::move(sys)), cfg_(cfg) {}

Vec StandardForm::operator()(double t, const Vec& z) const {
  const int k = sys_.k;
  if (z.size() != k) throw Error("standard form: dimension mismatch");
  Vec x = z;
  Mat y = Mat::Identity(k, k);
  if (t != 0.0) {
    Rhs rhs = [this, k, xx = Vec(k), f = Vec(k), a = Mat(k, k)](double tt, const Vec& s,
                                                                Vec& ds) mutable {
      xx = s.head(k);
      sys_.psi(tt, xx, f);
      ds.head(k) = f;
      sys_.psi_jac(tt, xx, a);
      Eigen::Map<Mat>(ds.data() + k, k, k) = a * Eigen::Map<const Mat>(s.data() + k, k, k);
    };
    Vec s0(k + k * k);
    s0.head(k) = z;
    Eigen::Map<Mat>(s0.data() + k, k, k).setIdentity();
    const Vec end = integrate(rhs, 0.0, t, s0, cfg_).back();
    x = end.head(k);
    y = Eigen::Map<const Mat>(end.data() + k, k, k);
  }
  const Eigen::PartialPivLU<Mat> lu(y);
  if (!(lu.rcond() > 1e-12))
    throw Error("standard form: flow Jacobian is singular to working precision");
  return lu.solve(sys_.eval_phi(t, x));
}

double StandardForm::periodicity_gap(const Vec& z) const {
  return (flow_omega(sys_, 0.0, sys_.period, z, cfg_) - z).norm();
}

bool StandardForm::periodicity_warning(const Vec& z, double tol) const {
  return periodicity_gap(z) > tol * (1.0 + z.norm());
}

StandardForm to_standard_form(const SystemDef& sys, const IntegratorConfig& cfg) {
  return StandardForm(sys, cfg);
}

}  // namespace smallpar
