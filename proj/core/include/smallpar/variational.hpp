#pragma once

#include "smallpar/common.hpp"
#include "smallpar/ode.hpp"
#include "smallpar/system.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace smallpar {

/// y = eta(t, s, xi): solution of y' = phi(t, Omega(t,0,xi)) + psi'(t, Omega(t,0,xi)) y
/// with y(s) = 0, integrated jointly with Omega as one (k + k) system.
struct EtaSolution {
  Vec xi;
  double s = 0.0;
  std::vector<double> times;
  std::vector<Vec> values;
  /// Coupled (x, y) trajectories from s forward and backward; either may be
  /// a single node when no evaluation time lies on that side.
  Trajectory forward;
  Trajectory backward;

  /// y(t) for any t covered by the two runs.
  Vec y(double t) const;
  /// Omega(t, 0, xi) along the same step sequence.
  Vec omega(double t) const;
};

EtaSolution eta(const SystemDef& sys, double s, const Vec& xi,
                std::span<const double> eval_times, const IntegratorConfig& cfg = {});

/// eta(T, s, xi) - eta(0, s, xi) through the coupled route. One run per (s, xi).
Vec eta_defect_direct(const SystemDef& sys, double s, const Vec& xi,
                      const IntegratorConfig& cfg = {});

/// All anchors s at once for a fixed xi.
///
/// With Y the fundamental matrix of y' = psi' y (Y(0) = I), Z = Y^{-1} and
/// G(t) = int_0^t Z phi, the solution with y(s) = 0 is Y(t)(G(t) - G(s)), so
///   defect(s) = Y(T)(G(T) - G(s)) + G(s).
/// (x, Z, G) is integrated once over [0, T]; G(s) comes from dense output.
class DefectProfile {
 public:
  DefectProfile(const SystemDef& sys, const Vec& xi, const IntegratorConfig& cfg = {});

  Vec operator()(double s) const;
  const Vec& xi() const { return xi_; }
  double period() const { return period_; }
  /// Y(T), the period map's derivative for the eps = 0 flow at xi.
  const Mat& monodromy() const { return y_t_; }
  /// Omega(T, 0, xi).
  Vec omega_T() const;

 private:
  int k_;
  double period_;
  Vec xi_;
  Trajectory traj_;
  Mat y_t_;
  Vec g_t_;
};

/// xi -> eta(T, s, xi) - eta(0, s, xi) as a reusable evaluator. Profiles are
/// cached per xi (bounded cache, thread-safe).
std::function<Vec(const Vec&)> eta_defect_field(const SystemDef& sys, double s,
                                                const IntegratorConfig& cfg = {});

/// Coefficient t -> A(t) of a linear system y' = A(t) y.
using LinearCoefficient = std::function<void(double t, Mat& a)>;

struct FloquetThresholds {
  double one_tol = 1e-6;
  double gap_tol = 1e-3;
};

struct MonodromyReport {
  Mat matrix;
  std::vector<std::complex<double>> multipliers;
  /// multiplier i is simple when every other one is at least gap_tol away.
  std::vector<bool> simple;
  double trace_integral = 0.0;
  double determinant = 0.0;
  /// |det M - exp(int trace)| / exp(int trace).
  double liouville_error = 0.0;
};

MonodromyReport monodromy(const LinearCoefficient& a, int k, double period,
                          const IntegratorConfig& cfg = {},
                          const FloquetThresholds& thr = {});

/// Eigen-decomposition and Liouville bookkeeping for a given monodromy.
MonodromyReport analyse_monodromy(Mat m, double trace_integral,
                                  const FloquetThresholds& thr = {});

class NonPeriodicCycle : public Error {
 public:
  using Error::Error;
};

struct FloquetPhaseReport {
  double theta = 0.0;
  MonodromyReport monodromy;
  std::complex<double> closest_to_one;
  double distance_to_one = 0.0;
  /// min over the other multipliers of |mu - 1|.
  double gap = 0.0;
  bool one_is_multiplier = false;
  bool simple = false;
};

/// Linearization y' = psi'(t, x0(t + theta)) y along a T-periodic solution of
/// x' = psi. The cycle is sampled once at theta, then x0(t + theta) is
/// reintegrated alongside Y so the coefficients carry no interpolation error.
std::vector<FloquetPhaseReport> floquet_condition_A3(
    const SystemDef& sys, const Trajectory& cycle, std::span<const double> theta_grid,
    const IntegratorConfig& cfg = {}, const FloquetThresholds& thr = {},
    double periodicity_tol = 1e-6);

/// Integrates x' = psi over one period from x0 and checks closure.
Trajectory unperturbed_cycle(const SystemDef& sys, const Vec& x0,
                             const IntegratorConfig& cfg = {},
                             double periodicity_tol = 1e-6);

/// Evaluates a T-periodic trajectory on [0, T] at any time by reduction mod T.
Vec periodic_eval(const Trajectory& cycle, double t);

}  // namespace smallpar
