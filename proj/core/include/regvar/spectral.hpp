#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "regvar/model.hpp"

namespace regvar {

// Extremal eigenvalues of the spectral-density-related Hermitian curves:
//   curve_a(w)      = (I - sum_k A_k^T e^{ikw}) (I - sum_k A_k e^{-ikw})   [p x p]
//   curve_a_bold(w) = (I - C^T e^{iw}) (I - C e^{-iw}), C the companion    [dp x dp]
// script_l = min_eig(sigma) / max_w max_eig(curve_a)   lower-bounds eigenvalues
// script_m = max_eig(sigma) / min_w min_eig(curve_a_bold)  upper-bounds them.
struct SpectralBounds {
  double script_l = 0.0;
  double script_m = 0.0;
  double lam_max_curve_a = 0.0;    // max over w of the largest eigenvalue
  double lam_min_curve_bold = 0.0; // min over w of the smallest eigenvalue
  int grid_points = 0;
};

struct AutocovarianceSet {
  // gammas[h] = Gamma(h) = E[x_{t+h} x_t^T], h = 0..lags-1.
  std::vector<Eigen::MatrixXd> gammas;
  // Block-Toeplitz dp x dp covariance of a lag window: block (i,j) is
  // Gamma(j-i) for j >= i and Gamma(i-j)^T otherwise.
  Eigen::MatrixXd c_x;
};

// Measured slacks from checking the population covariance against the bounds.
struct BoundsCheck {
  double min_eig_cx = 0.0;
  double cx_slack = 0.0;      // min_eig_cx - script_l
  double worst_qa = 0.0;      // max over directions of max_eig(Q_a)
  double qa_slack = 0.0;      // script_m - worst_qa
  int directions = 0;
};

Eigen::MatrixXcd curve_a_at(const VarModel& model, double omega);
Eigen::MatrixXcd curve_a_bold_at(const VarModel& model, double omega);

// Grid scan over [0, 2pi) followed by golden-section refinement of the best
// bracket. Requires a stable model and grid_points >= 64.
SpectralBounds spectral_bounds(const VarModel& model, int grid_points = 512);

// Stationary autocovariances via the companion Lyapunov equation
// S = C S C^T + blkdiag(sigma, 0, ..., 0): direct vectorized solve when
// dp <= 64, fixed-point iteration to 1e-12 otherwise. Gamma(h) for h >= d
// extends by the Yule-Walker recursion Gamma(h) = sum_k A_k Gamma(h-k).
AutocovarianceSet autocov_lyapunov(const VarModel& model, int lags);

// Checks min_eig(C_X) >= script_l (1 - 1e-8) and, for num_dirs random unit
// directions a, max_eig(Q_a) <= script_m (1 + 1e-8) where Q_a compresses the
// covariance of n_rows stacked lag windows. Throws numeric_error citing the
// offending eigenvalue on violation.
BoundsCheck verify_eigen_bounds(const VarModel& model, const SpectralBounds& bounds,
                                const AutocovarianceSet& acov, int n_rows = 8,
                                int num_dirs = 20, std::uint64_t seed = 0);

}  // namespace regvar
