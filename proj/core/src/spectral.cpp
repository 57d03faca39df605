#include "regvar/spectral.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "regvar/errors.hpp"
#include "regvar/rng.hpp"

namespace regvar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::MatrixXcd transfer_at(const std::vector<Eigen::MatrixXd>& coeffs, double omega) {
  const Eigen::Index p = coeffs[0].rows();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(p, p);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double phase = -static_cast<double>(k + 1) * omega;
    m -= coeffs[k].cast<std::complex<double>>() *
         std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return m;
}

double extremal_eig(const Eigen::MatrixXcd& herm, bool want_max) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numeric_error("Hermitian eigenvalue computation failed");
  return want_max ? es.eigenvalues().maxCoeff() : es.eigenvalues().minCoeff();
}

// Golden-section minimization of f over [a, b].
double golden_minimize(const std::function<double(double)>& f, double a, double b) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min(f1, f2);
}

}  // namespace

Eigen::MatrixXcd curve_a_at(const VarModel& model, double omega) {
  model.validate();
  const Eigen::MatrixXcd m = transfer_at(model.coeffs, omega);
  return m.adjoint() * m;
}

Eigen::MatrixXcd curve_a_bold_at(const VarModel& model, double omega) {
  const Eigen::MatrixXd comp = build_companion(model);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(comp.rows(), comp.cols());
  m -= comp.cast<std::complex<double>>() *
       std::complex<double>(std::cos(omega), -std::sin(omega));
  return m.adjoint() * m;
}

SpectralBounds spectral_bounds(const VarModel& model, int grid_points) {
  if (grid_points < 64) throw config_error("spectral grid needs at least 64 points");
  const StabilityReport stab = is_stable(model, 1.0);
  if (!stab.stable)
    throw numeric_error("spectral bounds need a stable model (spectral radius " +
                        std::to_string(stab.spectral_radius) + ")");

  const auto upper = [&](double w) { return extremal_eig(curve_a_at(model, w), true); };
  const auto lower = [&](double w) { return extremal_eig(curve_a_bold_at(model, w), false); };

  const double step = kTwoPi / grid_points;
  double best_max = -1.0, best_min = std::numeric_limits<double>::infinity();
  int arg_max = 0, arg_min = 0;
  for (int i = 0; i < grid_points; ++i) {
    const double w = i * step;
    const double hi = upper(w);
    const double lo = lower(w);
    if (hi > best_max) {
      best_max = hi;
      arg_max = i;
    }
    if (lo < best_min) {
      best_min = lo;
      arg_min = i;
    }
  }
  // Refine inside the one-cell-wide bracket around each grid optimum.
  const double refined_max = -golden_minimize(
      [&](double w) { return -upper(w); }, (arg_max - 1) * step, (arg_max + 1) * step);
  const double refined_min =
      golden_minimize(lower, (arg_min - 1) * step, (arg_min + 1) * step);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sig(model.sigma, Eigen::EigenvaluesOnly);
  if (sig.info() != Eigen::Success)
    throw numeric_error("eigenvalue computation failed on noise covariance");

  SpectralBounds out;
  out.grid_points = grid_points;
  out.lam_max_curve_a = std::max(best_max, refined_max);
  out.lam_min_curve_bold = std::min(best_min, refined_min);
  if (out.lam_min_curve_bold <= 0.0)
    throw numeric_error("companion spectral curve lost positive definiteness");
  out.script_l = sig.eigenvalues().minCoeff() / out.lam_max_curve_a;
  out.script_m = sig.eigenvalues().maxCoeff() / out.lam_min_curve_bold;
  return out;
}

AutocovarianceSet autocov_lyapunov(const VarModel& model, int lags) {
  const StabilityReport stab = is_stable(model, 1.0);
  if (!stab.stable)
    throw numeric_error("autocovariance needs a stable model (spectral radius " +
                        std::to_string(stab.spectral_radius) + ")");
  const int p = model.dim();
  const int d = model.lag_order();
  if (lags < d) throw config_error("autocovariance needs lags >= lag order");

  const Eigen::MatrixXd comp = build_companion(model);
  const Eigen::Index dp = comp.rows();
  Eigen::MatrixXd forcing = Eigen::MatrixXd::Zero(dp, dp);
  forcing.topLeftCorner(p, p) = model.sigma;

  Eigen::MatrixXd s(dp, dp);
  if (dp <= 64) {
    // Vectorized direct solve: (I - comp (x) comp) vec(S) = vec(forcing).
    const Eigen::Index nn = dp * dp;
    Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(nn, nn);
    for (Eigen::Index bc = 0; bc < dp; ++bc)
      for (Eigen::Index br = 0; br < dp; ++br) {
        const double w = comp(br, bc);
        if (w == 0.0) continue;
        sys.block(br * dp, bc * dp, dp, dp).noalias() -= w * comp;
      }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
    Eigen::VectorXd vec_s =
        lu.solve(Eigen::Map<const Eigen::VectorXd>(forcing.data(), nn));
    if (!vec_s.allFinite()) throw numeric_error("Lyapunov solve produced non-finite values");
    s = Eigen::Map<const Eigen::MatrixXd>(vec_s.data(), dp, dp);
  } else {
    s = forcing;
    Eigen::MatrixXd next(dp, dp);
    bool converged = false;
    for (int it = 0; it < 200000; ++it) {
      next.noalias() = comp * s * comp.transpose();
      next += forcing;
      const double delta = (next - s).norm();
      s.swap(next);
      if (delta <= 1e-12 * std::max(1.0, s.norm())) {
        converged = true;
        break;
      }
    }
    if (!converged) throw numeric_error("Lyapunov fixed-point iteration did not converge");
  }
  s = 0.5 * (s + s.transpose()).eval();

  AutocovarianceSet out;
  out.gammas.reserve(lags);
  for (int h = 0; h < std::min(lags, d); ++h)
    out.gammas.push_back(s.block(0, static_cast<Eigen::Index>(h) * p, p, p));
  for (int h = d; h < lags; ++h) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
    for (int k = 1; k <= d; ++k) g.noalias() += model.coeffs[k - 1] * out.gammas[h - k];
    out.gammas.push_back(std::move(g));
  }

  out.c_x.resize(dp, dp);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const Eigen::MatrixXd& g = out.gammas[static_cast<std::size_t>(std::abs(j - i))];
      out.c_x.block(static_cast<Eigen::Index>(i) * p, static_cast<Eigen::Index>(j) * p, p,
                    p) = (j >= i) ? g : Eigen::MatrixXd(g.transpose());
    }
  return out;
}

BoundsCheck verify_eigen_bounds(const VarModel& model, const SpectralBounds& bounds,
                                const AutocovarianceSet& acov, int n_rows, int num_dirs,
                                std::uint64_t seed) {
  if (n_rows < 1 || n_rows > 8) throw config_error("bound check covers 1..8 stacked rows");
  if (num_dirs < 1) throw config_error("need at least one direction");
  const int p = model.dim();
  const int d = model.lag_order();
  const Eigen::Index dp = static_cast<Eigen::Index>(d) * p;
  if (acov.c_x.rows() != dp) throw data_error("autocovariance set does not match model");

  BoundsCheck out;
  out.directions = num_dirs;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acov.c_x, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numeric_error("eigenvalue computation failed on lag-window covariance");
  out.min_eig_cx = es.eigenvalues().minCoeff();
  out.cx_slack = out.min_eig_cx - bounds.script_l;
  if (out.min_eig_cx < bounds.script_l * (1.0 - 1e-8))
    throw numeric_error("covariance lower bound violated: min eigenvalue " +
                        std::to_string(out.min_eig_cx) + " < " +
                        std::to_string(bounds.script_l));

  // Cross-covariance of stacked lag windows: E[u_{t+h} u_t^T] = comp^h S with
  // S the stationary companion covariance (= C_X).
  const Eigen::MatrixXd comp = build_companion(model);
  std::vector<Eigen::MatrixXd> powers(static_cast<std::size_t>(n_rows));
  powers[0] = acov.c_x;
  for (int h = 1; h < n_rows; ++h) powers[h] = comp * powers[h - 1];

  GaussianRng rng(mix_seed(seed, 0x51bbccf0a1d2e3f4ULL));
  out.worst_qa = 0.0;
  for (int dir = 0; dir < num_dirs; ++dir) {
    Eigen::VectorXd a = rng.vector(dp);
    a /= a.norm();
    Eigen::MatrixXd qa(n_rows, n_rows);
    for (int i = 0; i < n_rows; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = a.dot(powers[static_cast<std::size_t>(i - j)] * a);
        qa(i, j) = v;
        qa(j, i) = v;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qes(qa, Eigen::EigenvaluesOnly);
    if (qes.info() != Eigen::Success)
      throw numeric_error("eigenvalue computation failed on compressed covariance");
    const double top = qes.eigenvalues().maxCoeff();
    out.worst_qa = std::max(out.worst_qa, top);
    if (top > bounds.script_m * (1.0 + 1e-8))
      throw numeric_error("covariance upper bound violated: eigenvalue " +
                          std::to_string(top) + " > " + std::to_string(bounds.script_m));
  }
  out.qa_slack = bounds.script_m - out.worst_qa;
  return out;
}

}  // namespace regvar
