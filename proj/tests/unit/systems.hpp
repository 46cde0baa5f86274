// Reference systems shared by the unit tests and the acceptance binary.
#pragma once

#include "smallpar/system.hpp"

#include <cmath>

namespace smallpar::testing {

// Unit-circle cycle, phi = (1, 0).
inline SystemDef e1() {
  return make_expr_system("e1", kTwoPi, expr::VectorExpr::parse({"1", "0"}),
                          expr::VectorExpr::parse({"-x2 + x1*(1 - x1^2 - x2^2)",
                                                   "x1 + x2*(1 - x1^2 - x2^2)"}));
}

// Rotation with the forced van der Pol term f(t, -x1, x2).
inline SystemDef e2(double lambda = 1.0) {
  return make_expr_system(
      "e2", kTwoPi,
      expr::VectorExpr::parse({"0", "(1 - (-x1)^2)*x2 + lambda*cos(t)"}, {{"lambda", lambda}}),
      expr::VectorExpr::parse({"-x2", "x1"}));
}

inline SystemDef e3() {
  return make_expr_system("e3", kTwoPi, expr::VectorExpr::parse({"-x1 + cos(t)"}),
                          expr::VectorExpr::parse({"0"}));
}

inline constexpr const char* kE2Forcing = "(1 - x1^2)*x2 + lambda*cos(t)";

// Root of a^3 - 4a - 4 on [2, 3] by bisection.
inline double resonance_amplitude_oracle() {
  double lo = 2.0, hi = 3.0;
  auto f = [](double a) { return a * a * a - 4 * a - 4; };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double melnikov_e1_closed_form() { return -0.4 * (std::exp(4 * kPi) - 1.0); }

}  // namespace smallpar::testing
