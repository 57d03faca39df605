#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "regvar/penalties.hpp"
#include "regvar/rng.hpp"

using namespace regvar;

namespace {

Eigen::VectorXd bench_vector(int dim) {
  GaussianRng rng(17);
  return rng.vector(dim);
}

void bm_prox_l1(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const PenaltySpec spec = PenaltySpec::l1(dim);
  const Eigen::VectorXd v = bench_vector(dim);
  for (auto _ : state) benchmark::DoNotOptimize(penalty_prox(spec, v, 0.3));
}

void bm_prox_group(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const PenaltySpec spec =
      PenaltySpec::group_lasso_blocks(dim, std::vector<int>(static_cast<std::size_t>(dim / 10), 10));
  const Eigen::VectorXd v = bench_vector(dim);
  for (auto _ : state) benchmark::DoNotOptimize(penalty_prox(spec, v, 0.3));
}

void bm_prox_sparse_group(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const PenaltySpec spec = PenaltySpec::sparse_group_lasso_blocks(
      dim, 0.5, std::vector<int>(static_cast<std::size_t>(dim / 10), 10));
  const Eigen::VectorXd v = bench_vector(dim);
  for (auto _ : state) benchmark::DoNotOptimize(penalty_prox(spec, v, 0.3));
}

void bm_prox_owl(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const PenaltySpec spec = PenaltySpec::owl_linear(dim, 2.0, 1.0);
  const Eigen::VectorXd v = bench_vector(dim);
  for (auto _ : state) benchmark::DoNotOptimize(penalty_prox(spec, v, 0.3));
}

void bm_dual_owl(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const PenaltySpec spec = PenaltySpec::owl_linear(dim, 2.0, 1.0);
  const Eigen::VectorXd v = bench_vector(dim);
  for (auto _ : state) benchmark::DoNotOptimize(dual_norm(spec, v));
}

}  // namespace

BENCHMARK(bm_prox_l1)->Arg(100)->Arg(1000);
BENCHMARK(bm_prox_group)->Arg(100)->Arg(1000);
BENCHMARK(bm_prox_sparse_group)->Arg(100)->Arg(1000);
BENCHMARK(bm_prox_owl)->Arg(100)->Arg(1000);
BENCHMARK(bm_dual_owl)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
