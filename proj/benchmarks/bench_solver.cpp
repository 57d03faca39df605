#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "regvar/experiments.hpp"
#include "regvar/model.hpp"
#include "regvar/penalties.hpp"
#include "regvar/solver.hpp"

using namespace regvar;

namespace {

RegressionData bench_data(int p, int n) {
  TruthStructure truth;
  truth.s = 4;
  const VarModel model = make_ground_truth(PenaltyKind::L1, p, 1, truth, 0.9, 23);
  return build_regression(simulate(model, n, 200, 24), 1);
}

void bm_fit_l1(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const RegressionData data = bench_data(p, n);
  const PenaltySpec spec = PenaltySpec::l1(p);
  FitConfig fc;
  fc.lambda = 0.2 * lambda_max(data, spec);
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, spec, fc));
}

void bm_grid_warm(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const RegressionData data = bench_data(p, n);
  const PenaltySpec spec = PenaltySpec::l1(p);
  const std::vector<double> grid = lambda_grid(lambda_max(data, spec), 20, 1e-2);
  for (auto _ : state) {
    Eigen::MatrixXd warm = Eigen::MatrixXd::Zero(data.x.cols(), data.y.cols());
    FitConfig fc;
    for (double l : grid) {
      fc.lambda = l;
      warm = fit(data, spec, fc, &warm).b_hat;
    }
    benchmark::DoNotOptimize(warm);
  }
}

void bm_cross_validate(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const RegressionData data = bench_data(p, 400);
  const PenaltySpec spec = PenaltySpec::l1(p);
  const std::vector<double> grid = lambda_grid(lambda_max(data, spec), 10, 1e-2);
  for (auto _ : state)
    benchmark::DoNotOptimize(cross_validate(data, spec, grid, 5));
}

}  // namespace

BENCHMARK(bm_fit_l1)->Args({10, 200})->Args({20, 400})->Args({40, 800});
BENCHMARK(bm_grid_warm)->Args({10, 200})->Args({40, 800});
BENCHMARK(bm_cross_validate)->Arg(10)->Arg(20);
