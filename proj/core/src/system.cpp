#include "smallpar/system.hpp"

#include <memory>

namespace smallpar {

Vec SystemDef::eval_phi(double t, const Vec& x) const {
  Vec out(k);
  phi(t, x, out);
  return out;
}

Vec SystemDef::eval_psi(double t, const Vec& x) const {
  Vec out(k);
  psi(t, x, out);
  return out;
}

Mat SystemDef::eval_psi_jac(double t, const Vec& x) const {
  Mat out(k, k);
  psi_jac(t, x, out);
  return out;
}

Mat SystemDef::eval_phi_jac(double t, const Vec& x) const {
  Mat out(k, k);
  phi_jac(t, x, out);
  return out;
}

double SystemDef::psi_div(double t, const Vec& x) const {
  return eval_psi_jac(t, x).trace();
}

SystemDef SystemDef::with_phi(VecField new_phi, MatField new_phi_jac) const {
  SystemDef copy = *this;
  copy.symbolic.reset();
  copy.phi = std::move(new_phi);
  if (new_phi_jac) {
    copy.phi_jac = std::move(new_phi_jac);
  } else {
    copy.finite_difference_jacobians = true;
    copy.phi_jac = [f = copy.phi](double t, const Vec& x, Mat& out) {
      out = finite_difference_jacobian(f, t, x);
    };
  }
  return copy;
}

Mat finite_difference_jacobian(const VecField& f, double t, const Vec& x) {
  const Eigen::Index n = x.size();
  Mat jac(n, n);
  Vec xp = x, fp(n), fm(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    f(t, xp, fp);
    xp[j] = x[j] - h;
    f(t, xp, fm);
    xp[j] = x[j];
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

SystemDef make_expr_system(std::string name, double period, const expr::VectorExpr& phi,
                           const expr::VectorExpr& psi) {
  if (!(period > 0)) throw Error("system '" + name + "': period must be positive");
  const int k = psi.size();
  if (k <= 0) throw Error("system '" + name + "': phase dimension must be positive");
  if (phi.size() != k)
    throw Error("system '" + name + "': phi has " + std::to_string(phi.size()) +
                " components but psi has " + std::to_string(k));

  auto phi_c = std::make_shared<const expr::CompiledVector>(phi, k);
  auto psi_c = std::make_shared<const expr::CompiledVector>(psi, k);

  SystemDef sys;
  sys.name = std::move(name);
  sys.k = k;
  sys.period = period;
  sys.phi = [phi_c](double t, const Vec& x, Vec& out) { phi_c->eval(t, x, out); };
  sys.psi = [psi_c](double t, const Vec& x, Vec& out) { psi_c->eval(t, x, out); };
  sys.phi_jac = [phi_c](double t, const Vec& x, Mat& out) { phi_c->jacobian(t, x, out); };
  sys.psi_jac = [psi_c](double t, const Vec& x, Mat& out) { psi_c->jacobian(t, x, out); };
  sys.autonomous_psi = true;
  for (const auto& c : psi.components()) sys.autonomous_psi = sys.autonomous_psi && !c.depends_on_time();
  for (const auto& [p, v] : psi.params()) sys.parameters[p] = v;
  for (const auto& [p, v] : phi.params()) sys.parameters[p] = v;

  SymbolicSystem sym;
  sym.phi = phi;
  sym.psi = psi;
  sym.psi_jacobian = psi.jacobian(k);
  sym.phi_jacobian = phi.jacobian(k);
  // Sum of the diagonal, folding zero terms.
  expr::Expr div = sym.psi_jacobian[0][0];
  for (int i = 1; i < k; ++i) {
    const auto& d = sym.psi_jacobian[i][i];
    if (d.is_constant(0.0)) continue;
    if (div.is_constant(0.0)) {
      div = d;
    } else {
      auto n = std::make_shared<expr::Node>();
      n->kind = expr::Kind::Add;
      n->lhs = div.ptr();
      n->rhs = d.ptr();
      div = expr::Expr(n);
    }
  }
  sym.psi_divergence = div;
  sys.symbolic = std::move(sym);
  return sys;
}

SystemDef make_callable_system(std::string name, int k, double period, VecField phi,
                               VecField psi, MatField phi_jac, MatField psi_jac) {
  if (!(period > 0)) throw Error("system '" + name + "': period must be positive");
  if (k <= 0) throw Error("system '" + name + "': phase dimension must be positive");
  SystemDef sys;
  sys.name = std::move(name);
  sys.k = k;
  sys.period = period;
  sys.phi = std::move(phi);
  sys.psi = std::move(psi);
  if (!phi_jac || !psi_jac) sys.finite_difference_jacobians = true;
  sys.phi_jac = phi_jac ? std::move(phi_jac)
                        : MatField([f = sys.phi](double t, const Vec& x, Mat& out) {
                            out = finite_difference_jacobian(f, t, x);
                          });
  sys.psi_jac = psi_jac ? std::move(psi_jac)
                        : MatField([f = sys.psi](double t, const Vec& x, Mat& out) {
                            out = finite_difference_jacobian(f, t, x);
                          });
  return sys;
}

Rhs full_field(const SystemDef& sys, double eps) {
  if (eps == 0.0) return [psi = sys.psi](double t, const Vec& x, Vec& dx) { psi(t, x, dx); };
  return [phi = sys.phi, psi = sys.psi, eps, k = sys.k](double t, const Vec& x, Vec& dx) {
    thread_local Vec tmp;
    tmp.resize(k);
    psi(t, x, dx);
    phi(t, x, tmp);
    dx += eps * tmp;
  };
}

Trajectory flow_omega_dense(const SystemDef& sys, double t, double t0, const Vec& xi,
                            const IntegratorConfig& cfg) {
  if (xi.size() != sys.k) throw Error("flow_omega: state dimension mismatch");
  return integrate(full_field(sys, 0.0), t0, t, xi, cfg);
}

Vec flow_omega(const SystemDef& sys, double t, double t0, const Vec& xi,
               const IntegratorConfig& cfg) {
  if (t == t0) return xi;
  return flow_omega_dense(sys, t, t0, xi, cfg).back();
}

}  // namespace smallpar
