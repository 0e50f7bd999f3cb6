// Per-evaluation cost of the flow's building blocks on the production grid.

#include <benchmark/benchmark.h>

#include "hf/curvature.hpp"
#include "hf/flow.hpp"
#include "hf/harness.hpp"
#include "hf/topology.hpp"

namespace {

using namespace hf;

// Arg: n_beta; the grid is n x n x 2n.
GridPtr grid_for(const benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  return build_grid(n, n, 2 * n);
}

Framing perturbed(const GridPtr& g) { return gauge_apply(reference_left_framing(g), random_deformation(g, 42, 0.05, 2)); }

void BM_FrameDerivatives(benchmark::State& state) {
  const GridPtr g = grid_for(state);
  ScalarField f(g->size());
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = g->node(n).x * g->node(n).w;
  for (auto _ : state) benchmark::DoNotOptimize(g->frame_derivatives(f));
}

void BM_StructureFunctions(benchmark::State& state) {
  const GridPtr g = grid_for(state);
  const Framing w = perturbed(g);
  for (auto _ : state) benchmark::DoNotOptimize(structure_functions(w));
}

void BM_CurvatureBundle(benchmark::State& state) {
  const GridPtr g = grid_for(state);
  const Framing w = perturbed(g);
  for (auto _ : state) benchmark::DoNotOptimize(curvature_bundle(w));
}

void BM_FlowRhs(benchmark::State& state) {
  const GridPtr g = grid_for(state);
  const HomogeneousFlow flow(g, FlowParams{});
  const MatrixField a = perturbed(g).matrices();
  for (auto _ : state) benchmark::DoNotOptimize(flow.framing_rhs(a));
}

void BM_Rk4Step(benchmark::State& state) {
  const GridPtr g = grid_for(state);
  const HomogeneousFlow flow(g, FlowParams{});
  const MatrixField a = perturbed(g).matrices();
  for (auto _ : state) benchmark::DoNotOptimize(flow.step(a, 1e-3));
}

void BM_GaugeDegree(benchmark::State& state) {
  const GridPtr g = grid_for(state);
  const GaugeField a = random_deformation(g, 42, 0.05, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gauge_degree(a));
}

}  // namespace

BENCHMARK(BM_FrameDerivatives)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StructureFunctions)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CurvatureBundle)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FlowRhs)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Rk4Step)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GaugeDegree)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
