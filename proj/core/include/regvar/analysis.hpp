#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "regvar/model.hpp"
#include "regvar/penalties.hpp"
#include "regvar/spectral.hpp"

namespace regvar {

struct WidthEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  int samples = 0;
};

// Monte Carlo Gaussian width of the unit ball of the penalty norm:
// E[sup_{R(u) <= 1} <g, u>] = E[R*(g)], g ~ N(0, I_dim). Sample i draws from
// a seed derived as mix(seed, i), so the estimate is independent of the
// thread count.
WidthEstimate gaussian_width_mc(const PenaltySpec& spec, int dim, int samples,
                                std::uint64_t seed, int threads = 1);

// Predicted estimation-error scale at sample size n:
//   L1   sqrt(s log(dp) / n)
//   GL   sqrt(s_g (m + log k) / n)
//   SGL  sqrt((alpha s + (1-alpha) s_g) (m + log k) / n)
//   Owl  (2 c1 / c_bar) sqrt(s log(dp) / (c_bar n))
double rate_prediction(const PenaltySpec& spec, const StructureStats& stats, int p, int d,
                       double n);

// Smallest integer n with sqrt(n) > (2 sqrt(script_m) + c * width) / (sqrt(script_l) / 2):
// past this size the restricted-eigenvalue condition holds with high
// probability.
long long sample_bound(const SpectralBounds& bounds, double width, double c_const);

// Deterministic error bound ((1 + r)/r) * (lambda / kappa) * psi.
double det_error_bound(double lambda, double kappa, double r_const, double psi);

// Estimate of the restricted eigenvalue min ||X delta||^2 / (N ||delta||^2)
// over sampled error-set directions: solver deltas b_hat(lambda) - b_true per
// row, plus random rescalings/perturbations kept only when they satisfy
// R(b* + delta) <= R(b*) + R(delta)/r. Because the infimum is taken over a
// finite sample, the result is an upper estimate of the true constant.
double empirical_re_constant(const RegressionData& data, const PenaltySpec& spec,
                             const Eigen::MatrixXd& b_true, int trials, double r_const,
                             std::uint64_t seed);

}  // namespace regvar
