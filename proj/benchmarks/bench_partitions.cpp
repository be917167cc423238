#include "fracvar/approx.hpp"
#include "fracvar/bvops.hpp"
#include "fracvar/cells.hpp"
#include "fracvar/lab.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace fracvar;

static void BM_StencilEdges(benchmark::State& state) {
  const Grid g = Grid::box(2, 128, 0.0, 1.0);
  const EllipseDensity psi(1.0, 0.5, 0.3);
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stencil_edges(g, psi, order).size());
}
BENCHMARK(BM_StencilEdges)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_CoareaQuantize(benchmark::State& state) {
  const Grid g = Grid::box(2, static_cast<int>(state.range(0)), -1.0, 1.0);
  const LabelSet labels({0.0, 1.0, 2.0, 3.0});
  const ScalarField raw = lab::random_bump_field(g, 3);
  const auto [lo, hi] = std::minmax_element(raw.values.begin(), raw.values.end());
  ScalarField w(g);
  for (std::size_t k = 0; k < g.size(); ++k) w[k] = 3.0 * (raw[k] - *lo) / (*hi - *lo);
  const HomogeneousDensity psi(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(coarea_quantize(w, labels, psi, DomainMask::all(g), 0.1, 16).energy_v);
}
BENCHMARK(BM_CoareaQuantize)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

// Two labels: one exact min-cut on the cube.
static void BM_CellMincut(benchmark::State& state) {
  CellProblemSpec spec;
  spec.psi = std::make_shared<StepLaminate>(1.0, 2.0, 0.25, 0.0, 0);
  spec.nu = {0.6, 0.8};
  spec.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_cell(spec).value);
}
BENCHMARK(BM_CellMincut)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);

// Three labels: expansion moves.
static void BM_CellExpansion(benchmark::State& state) {
  CellProblemSpec spec;
  spec.psi = std::make_shared<HomogeneousDensity>(1.0);
  spec.labels = LabelSet({0.0, 1.0, 2.0});
  spec.ci = 2;
  spec.cj = 0;
  spec.nu = {0.6, 0.8};
  spec.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_cell(spec).value);
}
BENCHMARK(BM_CellExpansion)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_DecomposeCosineLaminate(benchmark::State& state) {
  const auto psi = std::make_shared<CosineLaminate>(1.5, 0.5, 1.0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(decompose_condition_A(psi, 0.05).size());
}
BENCHMARK(BM_DecomposeCosineLaminate)->Unit(benchmark::kMillisecond);

static void BM_MollificationBound(benchmark::State& state) {
  const Bump1D phi{1.0, 1.0};
  const auto b = [](double x) { return 0.5 * (1.0 + std::cos(8.0 * std::numbers::pi * x)); };
  for (auto _ : state) benchmark::DoNotOptimize(mollification_bound_check(b, phi, 1.5, 0.1, {1e-3, 1e-2, 0.1, 1.0}, static_cast<int>(state.range(0))).rhs);
}
BENCHMARK(BM_MollificationBound)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
