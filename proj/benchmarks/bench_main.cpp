#include "smallpar/expr.hpp"
#include "smallpar/ode.hpp"
#include "smallpar/system.hpp"
#include "smallpar/topology.hpp"
#include "smallpar/variational.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace smallpar;

namespace {

SystemDef limit_cycle() {
  return make_expr_system("e1", kTwoPi, expr::VectorExpr::parse({"1", "0"}),
                          expr::VectorExpr::parse({"-x2 + x1*(1 - x1^2 - x2^2)",
                                                   "x1 + x2*(1 - x1^2 - x2^2)"}));
}

void BM_IntegratePeriod(benchmark::State& state) {
  const SystemDef sys = limit_cycle();
  const Rhs rhs = full_field(sys, 1e-2);
  IntegratorConfig cfg;
  cfg.rel_tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  cfg.abs_tol = cfg.rel_tol * 1e-2;
  Vec x0(2);
  x0 << 0.8, 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(rhs, 0.0, kTwoPi, x0, cfg));
}
BENCHMARK(BM_IntegratePeriod)->Arg(6)->Arg(8)->Arg(10)->Arg(12);

void BM_ExprCompiled(benchmark::State& state) {
  const expr::Compiled f(expr::parse("(1 - x1^2)*x2 + lambda*cos(t) + exp(-x1/2)*sin(t - x2)^2"),
                         {{"lambda", 1.0}});
  double x[2] = {0.3, -0.7};
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f(t, x));
    t += 1e-3;
  }
}
BENCHMARK(BM_ExprCompiled);

void BM_ExprTreeWalk(benchmark::State& state) {
  const expr::Expr e = expr::parse("(1 - x1^2)*x2 + lambda*cos(t) + exp(-x1/2)*sin(t - x2)^2");
  const expr::ParamMap p{{"lambda", 1.0}};
  const std::vector<double> x{0.3, -0.7};
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(expr::evaluate(e, t, x, p));
    t += 1e-3;
  }
}
BENCHMARK(BM_ExprTreeWalk);

void BM_WindingNumber(benchmark::State& state) {
  const PlanarRegion disk = PlanarRegion::circle(Vec2::Zero(), 1.0, static_cast<int>(state.range(0)));
  const PlanarField f = [](const Vec2& p) {
    return Vec2(p[0] * p[0] - p[1] * p[1] + 0.1, 2 * p[0] * p[1] - 0.05);
  };
  for (auto _ : state) benchmark::DoNotOptimize(winding_number(f, disk).degree);
}
BENCHMARK(BM_WindingNumber)->Arg(128)->Arg(512)->Arg(2048);

void BM_DefectProfile(benchmark::State& state) {
  const SystemDef sys = limit_cycle();
  Vec xi(2);
  xi << 0.6, -0.2;
  for (auto _ : state) {
    const DefectProfile prof(sys, xi);
    benchmark::DoNotOptimize(prof(1.0));
  }
}
BENCHMARK(BM_DefectProfile);

void BM_DefectDirect(benchmark::State& state) {
  const SystemDef sys = limit_cycle();
  Vec xi(2);
  xi << 0.6, -0.2;
  for (auto _ : state) benchmark::DoNotOptimize(eta_defect_direct(sys, 1.0, xi));
}
BENCHMARK(BM_DefectDirect);

}  // namespace

BENCHMARK_MAIN();
