#include "smallpar/cli/builtins.hpp"

namespace smallpar::cli {

const std::vector<BuiltinSpec>& builtin_specs() {
  static const std::vector<BuiltinSpec> specs = {
      {"e1-circle",
       "planar system with the attracting unit-circle cycle x0(t) = (cos t, sin t), pushed by phi = (1, 0)",
       kTwoPi,
       {"1", "0"},
       {"-x2 + x1*(1 - x1^2 - x2^2)", "x1 + x2*(1 - x1^2 - x2^2)"},
       {},
       ""},
      {"e2-resonance",
       "linear rotation psi = (-x2, x1) with the forced van der Pol term in the second component",
       kTwoPi,
       {"0", "(1 - (-x1)^2)*x2 + lambda*cos(t)"},
       {"-x2", "x1"},
       {{"lambda", 1.0}},
       "phi = (0, f(t, u, v)) with f(t, u, v) = (1 - u^2) v + lambda cos t, u = -x1, v = x2.\n"
       "With xi(a, theta) = (-a cos theta, a sin theta) the period defect is\n"
       "R(theta) H(a, theta), R = [[cos, sin], [-sin, cos]]. xi reverses orientation\n"
       "(det = -a), so deg(defect, xi(V)) = -deg(H, V). The slot order of f's\n"
       "arguments is a convention choice; pass another forcing to `resonance` to compare."},
      {"e3-scalar",
       "scalar standard-form equation x' = eps (-x + cos t); psi = 0, averaged field -x",
       kTwoPi,
       {"-x1 + cos(t)"},
       {"0"},
       {},
       ""},
  };
  return specs;
}

const BuiltinSpec* find_builtin(std::string_view name) {
  for (const auto& s : builtin_specs())
    if (s.name == name) return &s;
  return nullptr;
}

SystemDef make_builtin(std::string_view name, const expr::ParamMap& overrides) {
  const BuiltinSpec* spec = find_builtin(name);
  if (!spec) {
    std::string msg = "unknown built-in system '" + std::string(name) + "' (available:";
    for (const auto& s : builtin_specs()) msg += " " + s.name;
    throw Error(msg + ")");
  }
  expr::ParamMap params = spec->parameters;
  for (const auto& [k, v] : overrides) {
    auto it = params.find(k);
    if (it == params.end())
      throw Error("built-in system '" + spec->name + "' has no parameter '" + k + "'");
    it->second = v;
  }
  return make_expr_system(spec->name, spec->period, expr::VectorExpr::parse(spec->phi, params),
                          expr::VectorExpr::parse(spec->psi, params));
}

std::vector<SystemDef> builtin_registry() {
  std::vector<SystemDef> out;
  for (const auto& s : builtin_specs()) out.push_back(make_builtin(s.name));
  return out;
}

}  // namespace smallpar::cli
