#pragma once

#include "smallpar/common.hpp"
#include "smallpar/expr.hpp"
#include "smallpar/ode.hpp"

#include <map>
#include <optional>
#include <string>

namespace smallpar {

/// Printable forms of an expression-defined system, kept for `describe`.
struct SymbolicSystem {
  expr::VectorExpr phi;
  expr::VectorExpr psi;
  std::vector<std::vector<expr::Expr>> psi_jacobian;
  std::vector<std::vector<expr::Expr>> phi_jacobian;
  expr::Expr psi_divergence;
};

/// The pair (phi, psi) of x' = eps*phi(t,x) + psi(t,x), both T-periodic in t.
struct SystemDef {
  std::string name;
  int k = 0;
  double period = 0.0;

  VecField phi;
  VecField psi;
  MatField phi_jac;
  MatField psi_jac;

  /// True when the Jacobians are central differences of opaque callables.
  bool finite_difference_jacobians = false;
  bool autonomous_psi = false;
  std::map<std::string, double> parameters;
  std::optional<SymbolicSystem> symbolic;

  Vec eval_phi(double t, const Vec& x) const;
  Vec eval_psi(double t, const Vec& x) const;
  Mat eval_psi_jac(double t, const Vec& x) const;
  Mat eval_phi_jac(double t, const Vec& x) const;
  /// Trace of psi_jac, computed from the same evaluation.
  double psi_div(double t, const Vec& x) const;

  /// Returns a copy with phi replaced (Jacobian by finite differences
  /// unless provided).
  SystemDef with_phi(VecField phi, MatField phi_jac = {}) const;
};

/// Builds a system from parsed component expressions; Jacobians and the
/// divergence are exact derivatives of the ASTs.
SystemDef make_expr_system(std::string name, double period,
                           const expr::VectorExpr& phi,
                           const expr::VectorExpr& psi);

/// Builds a system from opaque callables; Jacobians fall back to central
/// differences with step 1e-6 * (1 + |x_i|) unless supplied.
SystemDef make_callable_system(std::string name, int k, double period,
                               VecField phi, VecField psi,
                               MatField phi_jac = {}, MatField psi_jac = {});

/// Central-difference Jacobian of f at (t, x).
Mat finite_difference_jacobian(const VecField& f, double t, const Vec& x);

/// x' = eps*phi + psi.
Rhs full_field(const SystemDef& sys, double eps);

/// Omega(t, t0, xi): the eps = 0 solution through (t0, xi), at time t.
Vec flow_omega(const SystemDef& sys, double t, double t0, const Vec& xi,
               const IntegratorConfig& cfg = {});

/// Dense variant on the interval between t0 and t.
Trajectory flow_omega_dense(const SystemDef& sys, double t, double t0,
                            const Vec& xi, const IntegratorConfig& cfg = {});

}  // namespace smallpar
