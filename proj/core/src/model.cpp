#include "regvar/model.hpp"

#include <cmath>
#include <string>

#include "regvar/errors.hpp"
#include "regvar/rng.hpp"

namespace regvar {

void VarModel::validate() const {
  if (coeffs.empty()) throw data_error("VAR model needs at least one lag matrix");
  const Eigen::Index p = coeffs[0].rows();
  if (p < 1) throw data_error("VAR dimension must be positive");
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k].rows() != p || coeffs[k].cols() != p)
      throw data_error("lag matrix " + std::to_string(k + 1) + " is not " +
                       std::to_string(p) + "x" + std::to_string(p));
    if (!coeffs[k].allFinite())
      throw data_error("lag matrix " + std::to_string(k + 1) + " has non-finite entries");
  }
  if (sigma.rows() != p || sigma.cols() != p)
    throw data_error("noise covariance is not " + std::to_string(p) + "x" + std::to_string(p));
  if (!sigma.allFinite()) throw data_error("noise covariance has non-finite entries");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff()))
    throw data_error("noise covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw data_error("noise covariance is not positive definite");
}

Eigen::MatrixXd build_companion(const VarModel& model) {
  model.validate();
  const int p = model.dim();
  const int d = model.lag_order();
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d * p, d * p);
  for (int k = 0; k < d; ++k) comp.block(0, k * p, p, p) = model.coeffs[k];
  for (int k = 1; k < d; ++k)
    comp.block(k * p, (k - 1) * p, p, p) = Eigen::MatrixXd::Identity(p, p);
  return comp;
}

double spectral_radius(const Eigen::MatrixXd& square) {
  if (square.rows() != square.cols())
    throw data_error("spectral radius needs a square matrix");
  if (square.rows() == 1) return std::abs(square(0, 0));
  Eigen::EigenSolver<Eigen::MatrixXd> es(square, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw numeric_error("eigenvalue iteration failed on companion matrix");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

StabilityReport is_stable(const VarModel& model, double margin) {
  if (margin <= 0.0) throw config_error("stability margin must be positive");
  StabilityReport rep;
  rep.spectral_radius = spectral_radius(build_companion(model));
  rep.stable = rep.spectral_radius < margin;
  return rep;
}

namespace {

double radius_of_scaled(const std::vector<Eigen::MatrixXd>& coeffs, double c) {
  VarModel m;
  m.coeffs = coeffs;
  for (auto& a : m.coeffs) a *= c;
  m.sigma = Eigen::MatrixXd::Identity(coeffs[0].rows(), coeffs[0].cols());
  return spectral_radius(build_companion(m));
}

}  // namespace

RescaleResult rescale_to_radius(const std::vector<Eigen::MatrixXd>& coeffs,
                                double target_radius) {
  if (coeffs.empty()) throw data_error("cannot rescale an empty coefficient list");
  if (!(target_radius > 0.0) || !(target_radius < 1.0))
    throw config_error("target spectral radius must lie in (0, 1)");
  RescaleResult out;
  out.coeffs = coeffs;
  double base = 0.0;
  for (const auto& a : coeffs) base = std::max(base, a.cwiseAbs().maxCoeff());
  if (base == 0.0) {
    out.all_zero = true;
    return out;
  }
  const double r0 = radius_of_scaled(coeffs, 1.0);
  // Bracket the target, then bisect; radius grows with the common factor.
  double lo = r0 > 0.0 ? 0.5 * target_radius / r0 : 1e-8;
  double hi = r0 > 0.0 ? 2.0 * target_radius / r0 : 1.0;
  for (int guard = 0; guard < 200 && radius_of_scaled(coeffs, lo) >= target_radius; ++guard)
    lo *= 0.5;
  for (int guard = 0; guard < 200 && radius_of_scaled(coeffs, hi) <= target_radius; ++guard)
    hi *= 2.0;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = radius_of_scaled(coeffs, mid);
    if (std::abs(r - target_radius) <= 1e-9) break;
    (r < target_radius ? lo : hi) = mid;
  }
  out.factor = mid;
  for (auto& a : out.coeffs) a *= mid;
  return out;
}

namespace {

SimulatedPath simulate_impl(const VarModel& model, Eigen::Index T, int burn_in,
                            std::uint64_t seed, bool keep_noise) {
  model.validate();
  if (T < 1) throw config_error("trajectory length T must be >= 1");
  if (burn_in < 0) throw config_error("burn-in must be non-negative");
  const StabilityReport stab = is_stable(model, 1.0);
  if (!stab.stable)
    throw numeric_error("refusing to simulate an unstable model (spectral radius " +
                        std::to_string(stab.spectral_radius) + ")");

  const int p = model.dim();
  const int d = model.lag_order();
  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma);  // validated SPD above
  const Eigen::MatrixXd chol_l = llt.matrixL();

  GaussianRng rng(seed);
  const Eigen::Index total = static_cast<Eigen::Index>(burn_in) + T + 1;
  // Ring buffer of the last d states; zero initial state.
  std::vector<Eigen::VectorXd> hist(static_cast<std::size_t>(d), Eigen::VectorXd::Zero(p));
  SimulatedPath out;
  out.traj.samples.resize(T + 1, p);
  out.traj.seed = seed;
  out.traj.burn_in = burn_in;
  if (keep_noise) out.noise.resize(T + 1, p);

  std::size_t head = 0;  // hist[(head - 1 - k) mod d] is x_{t-1-k}
  for (Eigen::Index t = 0; t < total; ++t) {
    Eigen::VectorXd eps = chol_l * rng.vector(p);
    Eigen::VectorXd x = eps;
    for (int k = 0; k < d; ++k) {
      const std::size_t idx = (head + d - 1 - static_cast<std::size_t>(k)) % d;
      x.noalias() += model.coeffs[static_cast<std::size_t>(k)] * hist[idx];
    }
    hist[head] = x;
    head = (head + 1) % static_cast<std::size_t>(d);
    const Eigen::Index kept = t - burn_in;
    if (kept >= 0) {
      out.traj.samples.row(kept) = x.transpose();
      if (keep_noise) out.noise.row(kept) = eps.transpose();
    }
  }
  return out;
}

}  // namespace

Trajectory simulate(const VarModel& model, Eigen::Index T, int burn_in,
                    std::uint64_t seed) {
  return simulate_impl(model, T, burn_in, seed, false).traj;
}

SimulatedPath simulate_recorded(const VarModel& model, Eigen::Index T, int burn_in,
                                std::uint64_t seed) {
  return simulate_impl(model, T, burn_in, seed, true);
}

RegressionData build_regression(const Trajectory& traj, int d) {
  if (d < 1) throw config_error("lag order must be >= 1");
  const Eigen::Index rows = traj.samples.rows();
  const Eigen::Index p = traj.samples.cols();
  if (rows < d + 1)
    throw data_error("need at least " + std::to_string(d + 1) + " samples for lag order " +
                     std::to_string(d) + ", got " + std::to_string(rows));
  const Eigen::Index n = rows - d;  // T - d + 1 with rows = T + 1
  RegressionData data;
  data.x.resize(n, static_cast<Eigen::Index>(d) * p);
  data.y.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k)
      data.x.block(i, static_cast<Eigen::Index>(k) * p, 1, p) =
          traj.samples.row(d - 1 + i - k);
    data.y.row(i) = traj.samples.row(d + i);
  }
  return data;
}

Eigen::MatrixXd stack_coefficients(const VarModel& model) {
  const int p = model.dim();
  const int d = model.lag_order();
  Eigen::MatrixXd b(static_cast<Eigen::Index>(d) * p, p);
  for (int k = 0; k < d; ++k)
    b.block(static_cast<Eigen::Index>(k) * p, 0, p, p) = model.coeffs[k].transpose();
  return b;
}

Eigen::MatrixXd coefficient_rows(const VarModel& model) {
  return stack_coefficients(model).transpose();
}

}  // namespace regvar
