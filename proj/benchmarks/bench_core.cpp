#include <benchmark/benchmark.h>

#include "mwave/instability.hpp"
#include "mwave/linearize.hpp"
#include "mwave/operators.hpp"
#include "mwave/wave.hpp"

using namespace mwave;

namespace {

/// Free solve of a bump over a fixed number of leapfrog steps.
void BM_LeapfrogSteps(benchmark::State& state) {
  const int n = int(state.range(0));
  auto g = Grid::make(n, 0.5, 1.0);
  auto sp = SpeedModel::constant(g);
  const auto tg = TimeGrid::with_steps(40 * 0.4 * g->h(), 40);
  const CauchyPair data{bump(g, 0.5, 0.5, 0.3), ScalarField(g)};
  for (auto _ : state) benchmark::DoNotOptimize(solve_free(data, sp, tg).trace.values().data());
}
BENCHMARK(BM_LeapfrogSteps)->Arg(75)->Arg(150)->Unit(benchmark::kMillisecond);

/// Dirichlet solve of c^2 Lap_D u = f with variable speed.
void BM_DirichletSolve(benchmark::State& state) {
  const int n = int(state.range(0));
  auto g = Grid::with_padding(n, 4);
  auto c2 = ScalarField::from_function(g, [](double x, double y) { return 1 + 0.2 * x * y; });
  const SpeedModel sp(c2);
  const ScalarField rhs = bump(g, 0.5, 0.5, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(dirichlet_solve(rhs, sp, 1).values().data());
}
BENCHMARK(BM_DirichletSolve)->Arg(75)->Arg(150)->Unit(benchmark::kMillisecond);

/// One directional derivative of the source map at the default base point.
void BM_DeltaLambda1(benchmark::State& state) {
  auto g = Grid::make(75, 1.0, 1.0);
  auto sp = SpeedModel::constant(g);
  const auto tg = TimeGrid::for_speed(1.0, g->h(), 1.0);
  const DefaultBase db = default_base(g);
  const BasePoint base = BasePoint::prepare(sp, db.source, db.K, tg);
  SweepConfig cfg;
  cfg.cutoff = db.cutoff;
  const Perturbation p{ScalarField(g), oscillatory_h(cfg, 20.0)};
  for (auto _ : state) benchmark::DoNotOptimize(delta_lambda1(base, p).values().data());
}
BENCHMARK(BM_DeltaLambda1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
