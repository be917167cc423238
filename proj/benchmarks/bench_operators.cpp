#include "fracvar/fracops.hpp"
#include "fracvar/lab.hpp"

#include <benchmark/benchmark.h>

using namespace fracvar;

namespace {

FracOperatorConfig config(double s) {
  FracOperatorConfig c;
  c.s = s;
  return c;
}

}  // namespace

static void BM_RieszPotential(benchmark::State& state) {
  const Grid g = Grid::box(2, static_cast<int>(state.range(0)), -1.0, 1.0);
  const ScalarField f = lab::random_bump_field(g, 1);
  const FracOperatorConfig c = config(0.5);
  riesz_potential_field(f, 0.5, c);  // kernel tables are cached after the first call
  for (auto _ : state) benchmark::DoNotOptimize(riesz_potential_field(f, 0.5, c));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_RieszPotential)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNLogN);

static void BM_FracGradientDirect(benchmark::State& state) {
  const Grid g = Grid::box(2, static_cast<int>(state.range(0)), -1.0, 1.0);
  const ScalarField f = lab::random_bump_field(g, 1);
  const FracOperatorConfig c = config(0.6);
  frac_gradient_direct(f, c);
  for (auto _ : state) benchmark::DoNotOptimize(frac_gradient_direct(f, c));
}
BENCHMARK(BM_FracGradientDirect)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMillisecond);

static void BM_FracDivergence(benchmark::State& state) {
  const Grid g = Grid::box(2, static_cast<int>(state.range(0)), -1.0, 1.0);
  const VectorField v = lab::random_bump_vector(g, 1);
  const FracOperatorConfig c = config(0.6);
  frac_divergence(v, c);
  for (auto _ : state) benchmark::DoNotOptimize(frac_divergence(v, c));
}
BENCHMARK(BM_FracDivergence)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMillisecond);

// Whole-space query including the multilevel tail.
static void BM_FracVariationDisk(benchmark::State& state) {
  const Grid g = Grid::box(2, static_cast<int>(state.range(0)), -1.5, 1.5);
  LabelField u(g, LabelSet({0.0, 1.0}));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.center(k);
    u.index[k] = x[0] * x[0] + x[1] * x[1] < 1.0 ? 1 : 0;
  }
  FracOperatorConfig c = config(0.9);
  c.measure = MeasureModel::Mollified;
  for (auto _ : state) benchmark::DoNotOptimize(frac_variation(u, std::nullopt, c).total_with_tail());
}
BENCHMARK(BM_FracVariationDisk)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
