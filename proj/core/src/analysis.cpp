#include "regvar/analysis.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "regvar/errors.hpp"
#include "regvar/parallel.hpp"
#include "regvar/rng.hpp"
#include "regvar/solver.hpp"

namespace regvar {

WidthEstimate gaussian_width_mc(const PenaltySpec& spec, int dim, int samples,
                                std::uint64_t seed, int threads) {
  if (dim != spec.dim) throw config_error("width dimension does not match the penalty");
  if (samples < 100) throw config_error("width estimate needs at least 100 samples");
  if (!spec.is_norm()) throw config_error("Gaussian width needs a norm ball");

  std::vector<double> vals(static_cast<std::size_t>(samples));
  parallel_for(vals.size(), threads, [&](std::size_t i) {
    GaussianRng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    vals[i] = dual_norm(spec, rng.vector(dim));
  });
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= samples;
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= (samples - 1);

  WidthEstimate out;
  out.mean = mean;
  out.std_err = std::sqrt(var / samples);
  out.samples = samples;
  return out;
}

double rate_prediction(const PenaltySpec& spec, const StructureStats& stats, int p, int d,
                       double n) {
  if (p < 1 || d < 1) throw config_error("rate prediction needs positive p and d");
  if (!(n > 0.0)) throw config_error("rate prediction needs a positive sample size");
  const double dp = static_cast<double>(p) * d;
  switch (spec.kind) {
    case PenaltyKind::L1:
      if (stats.s < 1) throw config_error("rate prediction needs s >= 1");
      return std::sqrt(stats.s * std::log(dp) / n);
    case PenaltyKind::GroupLasso:
      if (stats.s_g < 1 || stats.m < 1 || stats.k_groups < 1)
        throw config_error("rate prediction needs group structure stats");
      return std::sqrt(stats.s_g * (stats.m + std::log(stats.k_groups)) / n);
    case PenaltyKind::SparseGroupLasso: {
      if (stats.s < 1 || stats.s_g < 1 || stats.m < 1 || stats.k_groups < 1)
        throw config_error("rate prediction needs sparse and group structure stats");
      const double eff = spec.alpha * stats.s + (1.0 - spec.alpha) * stats.s_g;
      return std::sqrt(eff * (stats.m + std::log(stats.k_groups)) / n);
    }
    case PenaltyKind::Owl: {
      if (stats.s < 1) throw config_error("rate prediction needs s >= 1");
      if (!(stats.c_bar > 0.0) || !(stats.c1 > 0.0))
        throw config_error("rate prediction needs ordered-weight stats");
      return (2.0 * stats.c1 / stats.c_bar) *
             std::sqrt(stats.s * std::log(dp) / (stats.c_bar * n));
    }
    case PenaltyKind::RidgeSq:
      throw config_error("no consistency rate for the squared-ridge reference");
  }
  throw config_error("unknown penalty kind");
}

long long sample_bound(const SpectralBounds& bounds, double width, double c_const) {
  if (!(bounds.script_l > 0.0)) throw config_error("sample bound needs script_l > 0");
  if (!(bounds.script_m > 0.0)) throw config_error("sample bound needs script_m > 0");
  if (!(width >= 0.0) || !(c_const > 0.0))
    throw config_error("sample bound needs width >= 0 and c > 0");
  const double rhs =
      (2.0 * std::sqrt(bounds.script_m) + c_const * width) / (0.5 * std::sqrt(bounds.script_l));
  const double n_real = rhs * rhs;
  // Smallest integer with sqrt(n) strictly above rhs.
  long long n = static_cast<long long>(std::floor(n_real)) + 1;
  while (n > 1 && std::sqrt(static_cast<double>(n - 1)) > rhs) --n;
  return n;
}

double det_error_bound(double lambda, double kappa, double r_const, double psi) {
  if (!(lambda >= 0.0)) throw config_error("error bound needs lambda >= 0");
  if (!(kappa > 0.0)) throw config_error("error bound needs kappa > 0");
  if (!(r_const > 1.0)) throw config_error("error bound needs r > 1");
  if (!(psi >= 0.0)) throw config_error("error bound needs psi >= 0");
  return (1.0 + r_const) / r_const * (lambda / kappa) * psi;
}

namespace {

bool in_error_set(const PenaltySpec& spec, const Eigen::VectorXd& b_star,
                  const Eigen::VectorXd& delta, double r_const) {
  const double lhs = penalty_value(spec, b_star + delta);
  const double rhs =
      penalty_value(spec, b_star) + penalty_value(spec, delta) / r_const;
  return lhs <= rhs + 1e-12 * std::max(1.0, rhs);
}

}  // namespace

double empirical_re_constant(const RegressionData& data, const PenaltySpec& spec,
                             const Eigen::MatrixXd& b_true, int trials, double r_const,
                             std::uint64_t seed) {
  spec.validate();
  if (!spec.is_norm()) throw config_error("error-set sampling needs a norm penalty");
  if (trials < 0) throw config_error("trial count must be non-negative");
  if (!(r_const > 1.0)) throw config_error("error-set inflation r must exceed 1");
  if (b_true.rows() != data.x.cols() || b_true.cols() != data.y.cols())
    throw data_error("coefficient matrix shape does not match data");

  const double n = static_cast<double>(data.n());
  const Eigen::Index dp = data.x.cols();

  // Natural error directions: estimation errors along a short lambda path.
  std::vector<std::pair<Eigen::Index, Eigen::VectorXd>> deltas;
  const double l_max = lambda_max(data, spec);
  if (l_max > 0.0) {
    FitConfig cfg;
    cfg.max_iters = 2000;
    cfg.tol = 1e-6;
    Eigen::MatrixXd warm;
    for (double lam : lambda_grid(l_max, 8, 1e-2)) {
      cfg.lambda = lam;
      FitResult res = fit(data, spec, cfg, warm.size() ? &warm : nullptr);
      warm = res.b_hat;
      for (Eigen::Index j = 0; j < res.b_hat.cols(); ++j) {
        Eigen::VectorXd delta = res.b_hat.col(j) - b_true.col(j);
        if (delta.norm() > 1e-10) deltas.emplace_back(j, std::move(delta));
      }
    }
  }
  if (deltas.empty()) throw numeric_error("no usable error directions found");

  double worst = std::numeric_limits<double>::infinity();
  const auto ratio = [&](const Eigen::VectorXd& delta) {
    return (data.x * delta).squaredNorm() / (n * delta.squaredNorm());
  };
  for (const auto& [j, delta] : deltas) worst = std::min(worst, ratio(delta));

  // Random rescalings and perturbations, kept only when they stay inside the
  // error set of their row.
  GaussianRng rng(mix_seed(seed, 0xa11ce5e7u));
  for (int t = 0; t < trials; ++t) {
    const auto& [j, base] = deltas[rng.index(deltas.size())];
    Eigen::VectorXd cand = base * std::exp(rng.uniform(-1.0, 1.0));
    if (rng.uniform(0.0, 1.0) < 0.5) {
      Eigen::VectorXd noise = rng.vector(dp);
      cand += 0.1 * cand.norm() / noise.norm() * noise;
    }
    if (cand.norm() < 1e-10) continue;
    if (!in_error_set(spec, b_true.col(j), cand, r_const)) continue;
    worst = std::min(worst, ratio(cand));
  }
  return worst;
}

}  // namespace regvar
