#pragma once

#include <vector>

#include <Eigen/Dense>

#include "regvar/model.hpp"
#include "regvar/penalties.hpp"

namespace regvar {

struct FitConfig {
  double lambda = 0.0;
  int max_iters = 5000;
  double tol = 1e-8;
  double backtrack_factor = 0.5;
  // 0 means auto: 1/max_eig((2/N) X^T X) when the smaller Gram side is
  // cheap to factor, otherwise 1.0 (backtracking then adapts).
  double init_step = 0.0;
  bool restart = true;
  int threads = 1;
  bool record_trace = false;
};

struct RowDiagnostics {
  int iterations = 0;
  double objective = 0.0;
  double residual = 0.0;  // prox-gradient fixed-point residual at the solution
  bool converged = false;
  bool monotone = true;
  std::vector<double> trace;  // objective per iteration when record_trace
};

struct FitResult {
  Eigen::MatrixXd b_hat;  // dp x p, column j solves the row-j problem
  std::vector<RowDiagnostics> per_row;
  double lambda = 0.0;
};

struct CvResult {
  double best_lambda = 0.0;
  std::size_t best_index = 0;
  std::vector<double> grid;
  std::vector<double> cv_mse;  // mean held-out MSE per grid value
};

// Minimizes (1/N)||y - X b||^2 + lambda R(b) for one output series by
// accelerated proximal gradient with backtracking line search, monotone
// acceptance, and function-value restart.
Eigen::VectorXd fit_row(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const PenaltySpec& spec, const FitConfig& config,
                        RowDiagnostics* diag = nullptr,
                        const Eigen::VectorXd* warm = nullptr);

// All p row problems; rows are independent, so threading changes nothing in
// the output. warm (dp x p) seeds each column when given.
FitResult fit(const RegressionData& data, const PenaltySpec& spec, const FitConfig& config,
              const Eigen::MatrixXd* warm = nullptr);

// Smallest lambda whose solution is exactly zero:
// max_j dual_norm((2/N) X^T y_j). Rejects non-norm penalties.
double lambda_max(const RegressionData& data, const PenaltySpec& spec);

// Log-spaced descending grid from l_max down to l_max * ratio.
std::vector<double> lambda_grid(double l_max, int count = 30, double ratio = 1e-3);

// K contiguous time folds; each fold is held out once, the fit warm-starts
// down the (descending) grid, and ties prefer the larger lambda.
CvResult cross_validate(const RegressionData& data, const PenaltySpec& spec,
                        const std::vector<double>& grid, int folds = 5,
                        const FitConfig& base = FitConfig{});

// Percentage of entries with |b| > zero_tol.
double nonzero_percent(const Eigen::MatrixXd& b_hat, double zero_tol = 1e-8);

// Mean squared one-step prediction error per entry: ||Y - X B||_F^2 / (N p).
double prediction_mse(const RegressionData& data, const Eigen::MatrixXd& b_hat);

}  // namespace regvar
