#pragma once

#include "smallpar/common.hpp"
#include "smallpar/ode.hpp"
#include "smallpar/system.hpp"
#include "smallpar/topology.hpp"

#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace smallpar {

class NewtonStalled : public Error {
 public:
  NewtonStalled(const std::string& msg, std::vector<double> history)
      : Error(msg), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

struct ShootOptions {
  double tol = 1e-9;
  int max_iterations = 25;
  int max_halvings = 40;
  /// Reciprocal condition number of P'(xi) - I below which it counts as singular.
  double singular_rcond = 1e-8;
  /// When forward Newton fails, retry on the inverse period map (same fixed
  /// points, contracting where P expands) and polish forward.
  bool reverse_fallback = true;
};

struct PeriodicOrbitResult {
  double eps = 0.0;
  Vec seed;
  Vec xi;
  double residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  /// P'(xi) - I was singular at the returned point (eps = 0 on a cycle).
  bool singular = false;
  std::vector<double> residual_history;
  std::vector<std::complex<double>> multipliers;
  Trajectory orbit;
  std::optional<bool> in_X;
  double dist_to_boundary = std::numeric_limits<double>::quiet_NaN();
  double dist_to_cycle = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

/// Damped Newton on P(xi) - xi, P the period map of x' = eps*phi + psi. The
/// Jacobian P'(xi) comes from the variational system with eps*phi' + psi'.
/// The reported residual is always that of the forward map.
PeriodicOrbitResult shoot(const SystemDef& sys, double eps, const Vec& seed,
                          const ShootOptions& opt = {}, const IntegratorConfig& cfg = {});

/// P(xi) and P'(xi) for x' = eps*phi + psi over one period. With
/// `inverse`, the state xi is placed at t = T and integrated back to 0.
std::pair<Vec, Mat> period_map(const SystemDef& sys, double eps, const Vec& xi,
                               const IntegratorConfig& cfg = {}, bool inverse = false);

struct MembershipReport {
  bool in_X = false;
  /// min over the time grid of the distance of Omega(0, t, x(t)) to the
  /// boundary (distance of the first outside point when not in X).
  double margin = 0.0;
  std::optional<double> witness_time;
  Vec witness_point;
};

/// Tests Omega(0, t, x(t)) in U on a uniform grid of [0, T].
MembershipReport membership_X(const SystemDef& sys, const Trajectory& orbit,
                              const ProductRegion& region, int grid_points = 256,
                              const IntegratorConfig& cfg = {});

/// Distance from a point to the closed curve traced by a trajectory.
double distance_to_curve(const Trajectory& curve, const Vec& p, int samples = 4096);

enum class SeedStrategy { WarmStart, Fixed };

struct SweepOptions {
  SeedStrategy strategy = SeedStrategy::WarmStart;
  Vec seed;
  /// Tried when shooting from the primary seed fails.
  std::optional<Vec> fallback_seed;
  ShootOptions shoot;
  int membership_points = 256;
};

struct SweepResult {
  std::vector<PeriodicOrbitResult> orbits;
  /// Least-squares slope of log(dist_to_cycle) against log(eps); NaN with
  /// fewer than two usable points.
  double slope = std::numeric_limits<double>::quiet_NaN();
};

/// Shoots at each eps; failures are recorded and the sweep continues.
SweepResult eps_sweep(const SystemDef& sys, const ProductRegion& region,
                      const std::vector<double>& eps_list, const SweepOptions& opt,
                      const Trajectory* cycle = nullptr, const IntegratorConfig& cfg = {});

/// Least-squares slope of log y against log x over pairs with x, y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace smallpar
