#include "smallpar/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smallpar {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                 c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                 a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                 e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner, dopri5).
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

// Step-size controller: new step within [kFacMin, kFacMax] * h.
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

bool all_finite(const Vec& v) { return v.allFinite(); }

std::string describe_state(double t, const Vec& x) {
  std::ostringstream os;
  os << "t=" << t << " x=(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0) || !(max_step > 0) || max_steps <= 0)
    throw std::invalid_argument(
        "IntegratorConfig: rel_tol, abs_tol, max_step and max_steps must be "
        "positive");
}

IntegratorConfig IntegratorConfig::tightened(double factor) const {
  IntegratorConfig c = *this;
  c.rel_tol /= factor;
  c.abs_tol /= factor;
  c.max_steps = static_cast<long>(max_steps * std::max(1.0, std::cbrt(factor)));
  return c;
}

Eigen::Map<const Vec> Trajectory::node_state(std::size_t i) const {
  return Eigen::Map<const Vec>(states_.data() + i * dim_, dim_);
}

Vec Trajectory::operator()(double t) const {
  Vec out(dim_);
  eval(t, out);
  return out;
}

void Trajectory::eval(double t, Eigen::Ref<Vec> out) const {
  if (times_.empty()) throw std::out_of_range("Trajectory: empty");
  if (!contains(t)) {
    std::ostringstream os;
    os << "Trajectory: t=" << t << " outside [" << t_min() << ", " << t_max()
       << "]";
    throw std::out_of_range(os.str());
  }
  const bool forward = t1() >= t0();
  // Index of the first node strictly past t in integration order.
  auto it = forward ? std::upper_bound(times_.begin(), times_.end(), t)
                    : std::upper_bound(times_.begin(), times_.end(), t,
                                       std::greater<double>());
  std::size_t seg = static_cast<std::size_t>(it - times_.begin());
  if (seg == 0) seg = 1;
  if (seg >= times_.size()) {
    out = node_state(times_.size() - 1);
    return;
  }
  --seg;  // t lies in [times_[seg], times_[seg+1])
  if (t == times_[seg]) {
    out = node_state(seg);
    return;
  }
  const double h = times_[seg + 1] - times_[seg];
  const double th = (t - times_[seg]) / h;
  const double th1 = 1.0 - th;
  const double* r = dense_.data() + seg * 4 * dim_;
  Eigen::Map<const Vec> y0(states_.data() + seg * dim_, dim_);
  Eigen::Map<const Vec> r2(r, dim_), r3(r + dim_, dim_), r4(r + 2 * dim_, dim_),
      r5(r + 3 * dim_, dim_);
  out = y0 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
}

Trajectory integrate(const Rhs& f, double t0, double t1, const Vec& xi,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(xi.size());
  Trajectory traj;
  traj.dim_ = n;
  traj.cfg_ = cfg;
  traj.times_.push_back(t0);
  traj.states_.assign(xi.data(), xi.data() + n);
  if (!all_finite(xi))
    throw NonFiniteField("integrate: non-finite initial state at " +
                             describe_state(t0, xi),
                         t0, xi);
  if (t0 == t1) return traj;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double hmax = std::min(cfg.max_step, span);

  Vec y = xi, ynew(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n),
      ytmp(n), err(n);
  long evals = 0;
  auto call = [&](double t, const Vec& x, Vec& dx) {
    f(t, x, dx);
    ++evals;
    if (!all_finite(dx))
      throw NonFiniteField(
          "integrate: non-finite field value at " + describe_state(t, x), t, x);
  };

  auto scaled_norm = [&](const Vec& v, const Vec& ya, const Vec& yb) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double q = v[i] / sc;
      acc += q * q;
    }
    return n > 0 ? std::sqrt(acc / n) : 0.0;
  };

  double t = t0;
  call(t, y, k1);

  // Initial step guess (Hairer's hinit).
  double h;
  {
    const double dnf = scaled_norm(k1, y, y);
    const double dny = scaled_norm(y, y, y);
    double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h0 = std::min(h0, hmax);
    ytmp = y + dir * h0 * k1;
    call(t + dir * h0, ytmp, k2);
    const double der2 = scaled_norm(k2 - k1, y, y) / h0;
    const double der12 = std::max(std::abs(der2), dnf);
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                     : std::pow(0.01 / der12, 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, hmax});
  }

  double facold = 1e-4;
  const double expo1 = 0.2 - kBeta * 0.75;
  bool last = false;
  bool reject = false;
  long steps = 0;

  while (true) {
    if (steps++ >= cfg.max_steps)
      throw StepLimitExceeded("integrate: step limit " +
                                  std::to_string(cfg.max_steps) +
                                  " exceeded at " + describe_state(t, y),
                              t, y);
    if (std::abs(h) <= 1e-14 * std::max(1.0, std::abs(t)))
      throw StepSizeUnderflow(
          "integrate: step size underflow at " + describe_state(t, y), t, y);

    const double remaining = std::abs(t1 - t);
    if (h >= 0.99 * remaining) {
      h = remaining;
      last = true;
    }
    const double hs = dir * h;

    ytmp = y + hs * (a21 * k1);
    call(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    call(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    call(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    call(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double tph = last ? t1 : t + hs;
    call(tph, ytmp, k6);
    ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    call(tph, ynew, k7);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double enorm = scaled_norm(err, y, ynew);
    const double fac11 = std::pow(std::max(enorm, 1e-300), expo1);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;

    if (enorm <= 1.0 && std::isfinite(enorm)) {
      facold = std::max(enorm, 1e-4);
      // Continuous extension coefficients for [t, t + hs].
      const std::size_t base = traj.dense_.size();
      traj.dense_.resize(base + 4 * n);
      Eigen::Map<Vec> r2(traj.dense_.data() + base, n),
          r3(traj.dense_.data() + base + n, n),
          r4(traj.dense_.data() + base + 2 * n, n),
          r5(traj.dense_.data() + base + 3 * n, n);
      r2 = ynew - y;
      r3 = hs * k1 - r2;
      r4 = r2 - hs * k7 - r3;
      r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

      t = tph;
      y = ynew;
      k1 = k7;
      traj.times_.push_back(t);
      traj.states_.insert(traj.states_.end(), y.data(), y.data() + n);
      if (last) break;
      hnew = std::min(hnew, hmax);
      if (reject) hnew = std::min(hnew, h);
      reject = false;
    } else {
      hnew = h / std::min(1.0 / kFacMin, fac11 / kSafety);
      reject = true;
      last = false;
      ++traj.rejected_;
    }
    h = hnew;
  }
  traj.rhs_evals_ = evals;
  return traj;
}

}  // namespace smallpar
