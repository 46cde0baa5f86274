#pragma once

#include "smallpar/common.hpp"
#include "smallpar/expr.hpp"
#include "smallpar/quadrature.hpp"
#include "smallpar/system.hpp"
#include "smallpar/topology.hpp"
#include "smallpar/variational.hpp"

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace smallpar {

enum class Verdict { Holds, Fails, Inconclusive };
const char* to_string(Verdict v);

struct Witness {
  Vec point;
  Vec value;
  /// Extra coordinate of the witness (anchor s, lambda, ...), NaN if unused.
  double parameter = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

/// Outcome of one hypothesis check. A "holds" verdict is numerical evidence
/// at the recorded grids and tolerances, never a proof.
struct HypothesisReport {
  std::string id;
  Verdict verdict = Verdict::Inconclusive;
  double margin = 0.0;
  std::optional<Witness> witness;
  std::string summary;
  std::map<std::string, double> settings;
  Table table;
};

struct ConditionTolerances {
  double a0_tol = 1e-7;  // scaled by (1 + |xi|)
  double a1_tol = 1e-6;
  double melnikov_tol = 1e-8;  // relative to max |M|
  FloquetThresholds floquet;
};

struct ConditionGrids {
  int s_points = 65;
  int theta_points = 65;
  int boundary_samples = 512;
  int quadrature_panels = 64;
};

/// max over boundary samples of |Omega(T,0,xi) - xi|.
HypothesisReport check_A0(const SystemDef& sys, const ProductRegion& region, int n_samples,
                          const ConditionTolerances& tol = {}, const IntegratorConfig& cfg = {});

/// min over (s, xi) of |eta(T,s,xi) - eta(0,s,xi)|.
HypothesisReport check_A1(const SystemDef& sys, const ProductRegion& region,
                          std::span<const double> s_grid, int boundary_samples,
                          const ConditionTolerances& tol = {}, const IntegratorConfig& cfg = {});

struct A2Result {
  HypothesisReport report;
  std::optional<DegreeReport> degree;
  /// Degree at twice the boundary resolution.
  std::optional<DegreeReport> degree_refined;
  /// Product regions only: max relative change of a factor's defect
  /// component when the other factors move away from their centers.
  double coupling = 0.0;
};

/// Degree of xi -> eta(T,0,xi) - eta(0,0,xi) on the region, computed at the
/// given boundary resolution and at twice that resolution.
///
/// For product regions factor j sees the j-th component pair of the defect
/// with the other factors frozen at their centers; this is the product map
/// only when the defect decouples, which is measured and reported.
A2Result check_A2(const SystemDef& sys, const ProductRegion& region, int boundary_samples = 512,
                  const WindingOptions& wopt = {}, const IntegratorConfig& cfg = {});

/// A3 over a phase grid: 1 is a multiplier and all others keep the gap.
HypothesisReport check_A3(const SystemDef& sys, const Trajectory& cycle,
                          std::span<const double> theta_grid, const ConditionTolerances& tol = {},
                          const IntegratorConfig& cfg = {});

struct MelnikovProfile {
  std::vector<double> theta;
  std::vector<double> values;
  double min_abs = 0.0;
  double max_abs = 0.0;
  double weight_min = 0.0;
  double weight_max = 0.0;
  /// Weight exp(-int_0^t div psi) at the quadrature nodes.
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// M(theta) = int_0^T w(t) <phi(t - theta, x0(t)), perp psi(t, x0(t))> dt with
/// w(t) = exp(-int_0^t div psi(tau, x0(tau)) dtau) and perp(u, v) = (-v, u).
/// The inner integral up to each node uses the panel sums plus an
/// 8-point rule on the partial panel.
MelnikovProfile melnikov_profile(const SystemDef& sys, const Trajectory& cycle,
                                 std::span<const double> theta_grid,
                                 int panels = kDefaultPanels);

HypothesisReport check_A3_1(const MelnikovProfile& profile, const ConditionTolerances& tol = {});

/// <eta(T,s,x0(theta)) - eta(0,s,x0(theta)), perp x0'(theta)> per theta.
std::vector<double> defect_normal_projection(const SystemDef& sys, const Trajectory& cycle,
                                             double s, std::span<const double> theta_grid,
                                             const IntegratorConfig& cfg = {});

struct Theorem2Report {
  HypothesisReport report;
  std::optional<int> degree1;
  std::optional<int> degree2;
  double min_defect = 0.0;
};

/// Uses affinity of eta in phi: the defect of lambda*phi1 + (1-lambda)*phi2 is
/// the same combination of the two endpoint defects, so only two profiles
/// per boundary point are integrated.
Theorem2Report theorem2_compare(const SystemDef& sys1, const SystemDef& sys2,
                                const PlanarRegion& region, std::span<const double> lambda_grid,
                                std::span<const double> s_grid, int boundary_samples,
                                const ConditionTolerances& tol = {},
                                const WindingOptions& wopt = {},
                                const IntegratorConfig& cfg = {});

struct ResonanceZero {
  double a = 0.0;
  double theta = 0.0;
  Vec2 residual = Vec2::Zero();
  double det = 0.0;
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();
};

/// H(a, theta) = int_0^{2pi} (sin tau, cos tau) f(tau + theta, a cos tau, -a sin tau) dtau
/// for a 2pi-periodic forcing f(t, u, v), written with u as x1 and v as x2.
class ResonanceMap {
 public:
  ResonanceMap(const expr::Expr& f, const expr::ParamMap& params, int panels = kDefaultPanels);

  Vec2 operator()(double a, double theta) const;
  /// Central differences with step 1e-5 (1 + |a|) in both variables.
  Eigen::Matrix2d jacobian(double a, double theta) const;

  std::vector<ResonanceZero> zeros;
  bool degenerate = false;
  std::vector<std::string> log;

 private:
  expr::Compiled f_;
  std::vector<double> nodes_, weights_, sin_, cos_;
};

struct ResonanceOptions {
  double a_min = 0.0, a_max = 4.0;
  double theta_min = 0.0, theta_max = kTwoPi;
  int a_points = 9, theta_points = 9;
  double newton_tol = 1e-12;
  int max_iterations = 50;
};

ResonanceMap resonance_H(const expr::Expr& f, const expr::ParamMap& params,
                         const ResonanceOptions& opt = {});

/// The box (a0 +- h, theta0 +- h) as a counterclockwise polygon in (a, theta).
PlanarRegion resonance_box(double a0, double theta0, double half_width);

/// xi(a, theta) = (-a cos theta, a sin theta). Its Jacobian determinant is
/// -a, so it reverses orientation.
Vec2 resonance_xi(double a, double theta);

/// Image xi(V) of the box, traversed so that it is positively oriented in
/// the xi-plane.
PlanarRegion resonance_image_region(double a0, double theta0, double half_width,
                                    int resolution = 512);

}  // namespace smallpar
