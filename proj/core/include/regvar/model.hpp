#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace regvar {

// VAR(d) process x_t = A_1 x_{t-1} + ... + A_d x_{t-d} + eps_t,
// eps_t ~ N(0, sigma) with sigma symmetric positive definite.
struct VarModel {
  std::vector<Eigen::MatrixXd> coeffs;  // A_1..A_d, each p x p
  Eigen::MatrixXd sigma;                // p x p noise covariance

  int dim() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs[0].rows()); }
  int lag_order() const { return static_cast<int>(coeffs.size()); }

  // Throws data_error when shapes are inconsistent, entries are non-finite,
  // or sigma fails a Cholesky factorization.
  void validate() const;
};

struct Trajectory {
  Eigen::MatrixXd samples;  // (T+1) x p, row t is x_t
  std::uint64_t seed = 0;
  int burn_in = 0;
};

// Trajectory plus the noise realization that generated it; noise.row(t) is
// the shock used to produce samples.row(t). Used to check the regression
// identity Y = X B + E exactly.
struct SimulatedPath {
  Trajectory traj;
  Eigen::MatrixXd noise;
};

// Stacked least-squares form: Y = X B + E with X rows
// [x_{d-1+i}^T, x_{d-2+i}^T, ..., x_i^T] and Y rows x_{d+i}^T, i = 0..N-1.
struct RegressionData {
  Eigen::MatrixXd x;  // N x dp
  Eigen::MatrixXd y;  // N x p
  Eigen::Index n() const { return x.rows(); }
};

struct StabilityReport {
  bool stable = false;
  double spectral_radius = 0.0;
};

struct RescaleResult {
  std::vector<Eigen::MatrixXd> coeffs;
  double factor = 1.0;
  bool all_zero = false;
};

// Companion form: top block row [A_1 ... A_d], identity blocks on the first
// subdiagonal, zeros elsewhere; dp x dp (equals A_1 when d = 1).
Eigen::MatrixXd build_companion(const VarModel& model);

double spectral_radius(const Eigen::MatrixXd& square);

// Stable iff the companion spectral radius is < margin.
StabilityReport is_stable(const VarModel& model, double margin = 1.0);

// Scales all A_k by a single positive factor so the companion spectral radius
// hits target_radius within 1e-6 (bisection; the scale/radius map is exact
// only for d = 1). All-zero input is returned unchanged with all_zero set.
RescaleResult rescale_to_radius(const std::vector<Eigen::MatrixXd>& coeffs,
                                double target_radius);

// Simulates T+1 samples after discarding burn_in steps from a zero initial
// state. Pure function of (model, T, burn_in, seed).
Trajectory simulate(const VarModel& model, Eigen::Index T, int burn_in,
                    std::uint64_t seed);
SimulatedPath simulate_recorded(const VarModel& model, Eigen::Index T, int burn_in,
                                std::uint64_t seed);

// N = T - d + 1 stacked rows; requires samples.rows() >= d + 1.
RegressionData build_regression(const Trajectory& traj, int d);

// B = [A_1^T; ...; A_d^T], dp x p, so that Y ~ X B.
Eigen::MatrixXd stack_coefficients(const VarModel& model);

// Row i holds [A_1(i,:), A_2(i,:), ..., A_d(i,:)]: the length-dp coefficient
// vector of output series i. Equals stack_coefficients(model).transpose().
Eigen::MatrixXd coefficient_rows(const VarModel& model);

}  // namespace regvar
