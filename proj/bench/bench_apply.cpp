#include <benchmark/benchmark.h>

#include <random>

#include "homog/stencil.hpp"

using namespace homog;

namespace {

struct Fixture {
  EpsilonStencil stencil;
  DiscreteField u;
};

Fixture make(int points) {
  const double side = 8.0;
  const double eps = 8.0 * side / points;
  const TorusGrid g(1, side, points);
  Fixture f{assemble_stencil(g, make_builtin_kernel("pareto", 1, 1.5, {0.5, 0.5, 0.0}),
                             make_builtin_coefficient("separable-trig", 1, {1.0, 0.5}), eps),
            DiscreteField(g)};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (std::size_t i = 0; i < f.u.size(); ++i) f.u[i] = n(rng);
  return f;
}

void BM_ApplySerial(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_operator_serial(f.stencil, f.u));
  state.SetComplexityN(state.range(0));
}

void BM_ApplyParallel(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_operator(f.stencil, f.u));
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_ApplySerial)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_ApplyParallel)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
