#include <algorithm>

#include <benchmark/benchmark.h>

#include "regvar/experiments.hpp"
#include "regvar/model.hpp"
#include "regvar/spectral.hpp"

using namespace regvar;

namespace {

VarModel bench_model(int p, int d) {
  TruthStructure truth;
  truth.s = std::min(4, p);
  return make_ground_truth(PenaltyKind::L1, p, d, truth, 0.8, 31);
}

void bm_spectral_bounds(benchmark::State& state) {
  const VarModel model =
      bench_model(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_bounds(model));
}

void bm_autocov(benchmark::State& state) {
  const VarModel model =
      bench_model(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(autocov_lyapunov(model, model.lag_order() + 4));
}

void bm_simulate(benchmark::State& state) {
  const VarModel model = bench_model(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(model, 1000, 200, 7));
}

}  // namespace

BENCHMARK(bm_spectral_bounds)->Args({5, 1})->Args({10, 2})->Args({20, 2});
BENCHMARK(bm_autocov)->Args({5, 1})->Args({10, 2})->Args({20, 2});
BENCHMARK(bm_simulate)->Arg(10)->Arg(40);
