#pragma once

#include "smallpar/common.hpp"
#include "smallpar/ode.hpp"
#include "smallpar/system.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace smallpar {

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& msg, std::vector<double> trend)
      : Error(msg), trend_(std::move(trend)) {}
  /// max over samples of |Phi_n - Phi_2n| for n = 1, 2, 4, ...
  const std::vector<double>& trend() const { return trend_; }

 private:
  std::vector<double> trend_;
};

class LeftValidatedBall : public Error {
 public:
  using Error::Error;
};

/// eta(-n T, 0, xi) for each n of an increasing list, continuing one
/// backward run of the coupled (Omega, eta) system period block by block.
std::vector<Vec> eta_backward(const SystemDef& sys, const Vec& xi, const std::vector<int>& ns,
                              const IntegratorConfig& cfg = {});

struct AveragingOptions {
  int n_max = 1024;
  double phi_tol = 1e-7;
  int samples = 17;
  std::uint64_t seed = 20240601;
};

/// Phi(xi) = -lim eta(-nT, 0, xi) / (nT), truncated at n_used.
class AveragedField {
 public:
  AveragedField() = default;
  /// Wraps a known field (closed forms, tests).
  static AveragedField from_function(std::function<Vec(const Vec&)> f, int k, Vec center,
                                     double radius);

  Vec operator()(const Vec& xi) const;
  /// Central differences, step 1e-6 (1 + |xi_j|).
  Mat jacobian(const Vec& xi) const;

  int k = 0;
  int n_used = 0;
  Vec center;
  double radius = 0.0;
  std::vector<Vec> samples;
  /// |Phi_n_used - Phi_2n_used| per sample.
  std::vector<double> estimates;
  /// max over samples for each n tried.
  std::vector<double> trend;

 private:
  friend AveragedField averaged_field(const SystemDef&, const Vec&, double,
                                      const AveragingOptions&, const IntegratorConfig&);
  std::function<Vec(const Vec&)> eval_;
};

/// Doubles n from 1 until max over the validation samples (center plus
/// seeded uniform points of B(center, r)) of |Phi_n - Phi_2n| <= phi_tol.
AveragedField averaged_field(const SystemDef& sys, const Vec& center, double radius,
                             const AveragingOptions& opt = {}, const IntegratorConfig& cfg = {});

/// f0(xi) = (1/T) int_0^T phi(tau, xi) dtau by composite Gauss-Legendre.
Vec time_average(const SystemDef& sys, const Vec& xi, int panels = 64);

struct AveragedSolution {
  Trajectory z;
  /// Finite-difference estimate of sup |Phi'| along z, evidence for uniqueness.
  double lipschitz = 0.0;
};

/// z' = Phi(z), z(0) = xi0 on [0, d]. Leaving B(center, r) raises LeftValidatedBall.
AveragedSolution solve_averaged(const AveragedField& field, const Vec& xi0, double d,
                                const IntegratorConfig& cfg = {});

struct CauchyVerdict {
  double eps = 0.0;
  Vec xi0;
  double d = 0.0;
  double sup_error = 0.0;
  double gamma_tol = 0.0;
  bool pass = false;
  std::vector<double> times;
  std::vector<Vec> x_eps;
  std::vector<Vec> approx;
  std::vector<double> errors;
};

struct Theorem4Options {
  int grid_points = 1024;
};

/// Sup over a uniform grid of [0, d/eps] of |x_eps(t) - Omega(t, 0, z(eps t))|.
/// Omega(t, 0, .) is integrated in one-period chunks, restarting the
/// integrator at every period boundary.
std::vector<CauchyVerdict> verify_theorem4(const SystemDef& sys, const AveragedField& field,
                                           const Vec& xi0, double d,
                                           const std::vector<double>& eps_list, double gamma_tol,
                                           const IntegratorConfig& cfg = {},
                                           const Theorem4Options& opt = {});

/// Omega(t, 0, xi) as a chain of one-period integrations.
Vec flow_omega_chunked(const SystemDef& sys, double t, const Vec& xi,
                       const IntegratorConfig& cfg = {});

/// Right-hand side of the standard form obtained by z = Omega(0, t, x):
///   f(t, z) = Y(t)^{-1} phi(t, Omega(t, 0, z)),  Y = d Omega(t, 0, .)/d xi.
class StandardForm {
 public:
  StandardForm(SystemDef sys, IntegratorConfig cfg = {});

  Vec operator()(double t, const Vec& z) const;
  /// |Omega(0, T, z) - z|: nonzero when the change of variable is not
  /// T-periodic at z.
  double periodicity_gap(const Vec& z) const;
  bool periodicity_warning(const Vec& z, double tol = 1e-7) const;

 private:
  SystemDef sys_;
  IntegratorConfig cfg_;
};

StandardForm to_standard_form(const SystemDef& sys, const IntegratorConfig& cfg = {});

}  // namespace smallpar
