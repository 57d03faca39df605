#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "regvar/model.hpp"
#include "regvar/penalties.hpp"
#include "regvar/solver.hpp"

namespace regvar {

// Sparsity layout planted into a synthetic VAR coefficient matrix.
struct TruthStructure {
  int s = 4;         // nonzeros per row (L1 / Owl layouts)
  int k_groups = 0;  // contiguous groups over the dp row (GL / SGL layouts)
  int s_g = 0;       // active groups per row (GL / SGL layouts)
};

// Plants the requested support with entries of magnitude uniform in [0.5, 1)
// and random signs, then rescales all lags by one factor so the companion
// spectral radius equals target_radius. The sparse-group layout additionally
// zeroes a random half of each active group. sigma is the identity.
VarModel make_ground_truth(PenaltyKind kind, int p, int d, const TruthStructure& truth,
                           double target_radius, std::uint64_t seed);

struct ScalingConfig {
  PenaltyKind kind = PenaltyKind::L1;
  TruthStructure truth{};
  double alpha = 0.5;                 // sparse-group mixing
  double owl_hi = 2.0, owl_lo = 1.0;  // linear ordered-weight generator
  std::vector<int> p_list;
  std::vector<int> n_list;
  int d = 1;
  int runs = 50;
  int lambda_grid_size = 30;
  double lambda_ratio = 1e-3;
  double target_radius = 0.9;
  Eigen::MatrixXd sigma;  // empty = identity
  int burn_in = 500;
  std::uint64_t master_seed = 1;
  // Global index of the first run: run r draws its seeds as run_offset + r,
  // so a sweep with runs = R equals R single-run sweeps at offsets 0..R-1.
  int run_offset = 0;
  int threads = 1;
  FitConfig solver{};  // lambda is driven by the grid; tol/max_iters apply
};

// One (p, N, lambda-index) cell aggregated across runs.
struct ScalingRecord {
  PenaltyKind kind = PenaltyKind::L1;
  int p = 0, d = 1, n = 0;
  StructureStats stats;
  double lambda = 0.0;      // mean raw lambda across runs at this grid index
  double lambda_rel = 0.0;  // lambda / lambda_max (identical across runs)
  double err_mean = 0.0;    // mean RMS per-row error ||vec(B_hat - B_true)||_2 / sqrt(p)
  double err_std = 0.0;
  double truth_norm = 0.0;  // mean ||vec(B_true)||_2 / sqrt(p) across runs (not serialized)
  bool is_best = false;  // smallest err_mean within its (p, N) cell
};

struct CellFailure {
  int p = 0, n = 0, run = 0;
  std::string message;
};

struct ScalingResult {
  std::vector<ScalingRecord> records;
  std::vector<CellFailure> failures;
  // Solver health across every fit in the sweep.
  long long total_fits = 0;
  long long converged_fits = 0;
  bool all_monotone = true;
  double worst_residual_ratio = 0.0;  // residual / (tol * max(1, ||b||))
};

// Full sweep: for every (p, N, run) generate a fresh truth and trajectory
// from seeds derived off master_seed, fit the whole descending lambda grid
// with warm starts, and aggregate estimation errors per grid index. Failures
// are recorded and skipped, not fatal. Deterministic for a fixed master seed
// regardless of the thread count.
ScalingResult run_scaling(const ScalingConfig& config);

// Best-lambda error curve of one dimension p on the rescaled sample axis.
struct ExpCurve {
  int p = 0;
  std::vector<double> x, y;
};

// Rescaled x-axis under which the error curves should collapse:
//   L1   N / (s log(dp))          GL   N / (s_g (m + log k))
//   SGL  N / ((alpha s + (1-alpha) s_g)(m + log k))
//   Owl  c_bar N / (s log p)
std::vector<ExpCurve> rescale_axis(const std::vector<ScalingRecord>& records,
                                   double alpha = 0.5);

struct AlignmentReport {
  std::vector<double> grid_x;  // 20 log-spaced points on the common range
  double max_pairwise_dev = 0.0;
  std::vector<std::pair<int, double>> loglog_slope_per_p;
};

// Interpolates every curve (linearly in log-log space) onto the shared
// x-range and reports the worst relative pairwise gap plus per-curve
// least-squares log-log slopes.
AlignmentReport alignment_metric(const std::vector<ExpCurve>& curves);

struct LambdaTrend {
  std::vector<std::pair<int, double>> logn_slope_per_p;  // log best-lambda vs log N
  double corr_sqrt_log_p = 0.0;  // best-lambda vs sqrt(log p) at fixed N
  int fixed_n = 0;
};

// Trends of the error-minimizing lambda: slope in log N per dimension, and
// Pearson correlation against sqrt(log p) at fixed_n (default: largest N
// present for all p).
LambdaTrend lambda_trend(const std::vector<ScalingRecord>& records, int fixed_n = -1);

}  // namespace regvar
