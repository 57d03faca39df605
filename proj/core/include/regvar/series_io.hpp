#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regvar/experiments.hpp"
#include "regvar/model.hpp"
#include "regvar/penalties.hpp"
#include "regvar/solver.hpp"

namespace regvar {

// A loaded multivariate series; when standardized, each column was mapped to
// (x - mean) / max(std, 1e-12) and the raw moments are kept for reference.
struct SeriesFile {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // rows are time points
  bool standardized = false;
  Eigen::VectorXd means;
  Eigen::VectorXd stds;
};

// Strict CSV reader: one header row, comma-separated numeric columns, equal
// column counts. Errors cite the 1-based line number.
SeriesFile load_csv(const std::string& path, bool standardize);

// Header "t,x1,...,xp"; values with 17 significant digits (round-trip exact).
void save_trajectory_csv(const std::string& path, const Trajectory& traj);

// Plain numeric matrix with a generated header c1..cp (same float format).
void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                     const std::string& col_prefix);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

void save_fit_diagnostics_csv(const std::string& path,
                              const std::vector<RowDiagnostics>& rows);

// kind,p,d,N,s,s_g,K,m,lambda,lambda_rel,err_mean,err_std,is_best
void save_scaling_records_csv(const std::string& path,
                              const std::vector<ScalingRecord>& records);

// rescaled_x,curve_p,err
void save_alignment_csv(const std::string& path, const std::vector<ExpCurve>& curves);

struct RealEvalResult {
  double best_lambda = 0.0;
  double test_mse = 0.0;
  double sparsity = 0.0;  // percent nonzero entries
  Eigen::MatrixXd b_hat;
  Eigen::Index n_train = 0, n_test = 0;
};

// Chronological holdout: cross-validates lambda on the first 80% of the
// regression rows, refits there at the winner, and scores one-step-ahead MSE
// on the final 20%. The held-out rows are never touched before scoring.
// Squared-ridge penalties get their grid top from max_j ||(2/N) X^T y_j||_2
// since they have no exact-zero threshold.
RealEvalResult evaluate_real(const SeriesFile& series, int d, const PenaltySpec& spec,
                             int folds, int grid_size = 30, double grid_ratio = 1e-3,
                             const FitConfig& base = FitConfig{});

}  // namespace regvar
