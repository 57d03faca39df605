#include "regvar/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "regvar/errors.hpp"
#include "regvar/parallel.hpp"

namespace regvar {

namespace {

void check_fit_config(const FitConfig& c) {
  if (!(c.lambda >= 0.0)) throw config_error("lambda must be non-negative");
  if (c.max_iters < 1) throw config_error("max_iters must be positive");
  if (!(c.tol > 0.0)) throw config_error("tolerance must be positive");
  if (!(c.backtrack_factor > 0.0) || !(c.backtrack_factor < 1.0))
    throw config_error("backtrack factor must lie in (0, 1)");
  if (!(c.init_step >= 0.0)) throw config_error("initial step must be non-negative");
  if (c.threads < 1) throw config_error("thread count must be positive");
}

// Smooth part (1/N)||y - X b||^2 in one of two forms: through the Gram
// matrix (one O(dp^2) product per evaluation) or through X directly
// (O(N dp)). The Gram form wins once N is not much smaller than dp because
// it is shared across all rows, lambda values, and iterations.
struct SmoothShared {
  const Eigen::MatrixXd* x = nullptr;
  Eigen::MatrixXd gram;  // X^T X when use_gram
  bool use_gram = false;
  double n = 1.0;
  double step0 = 1.0;
};

struct SmoothRow {
  const SmoothShared* sh = nullptr;
  Eigen::VectorXd xty;           // X^T y
  const Eigen::VectorXd* y = nullptr;  // direct mode only
  double yy = 0.0;

  // lin = G*b (gram mode) or X*b (direct mode); enough to recover value and
  // gradient, and linear in b so momentum points cost no matrix product.
  Eigen::VectorXd lin(const Eigen::VectorXd& b) const {
    if (sh->use_gram) return sh->gram * b;
    return (*sh->x) * b;
  }
  double value(const Eigen::VectorXd& b, const Eigen::VectorXd& lin_b) const {
    if (sh->use_gram) return (b.dot(lin_b) - 2.0 * xty.dot(b) + yy) / sh->n;
    return (lin_b - *y).squaredNorm() / sh->n;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& lin_b) const {
    if (sh->use_gram) return (2.0 / sh->n) * (lin_b - xty);
    return (2.0 / sh->n) * (sh->x->transpose() * (lin_b - *y));
  }
};

SmoothShared prepare_shared(const Eigen::MatrixXd& x, const FitConfig& config) {
  SmoothShared sh;
  sh.x = &x;
  sh.n = static_cast<double>(x.rows());
  const Eigen::Index n = x.rows(), dp = x.cols();
  sh.use_gram = dp <= 4096 && 2 * n >= dp;
  if (sh.use_gram) sh.gram.noalias() = x.transpose() * x;

  if (config.init_step > 0.0) {
    sh.step0 = config.init_step;
    return sh;
  }
  // Largest eigenvalue of X^T X equals that of X X^T; factor the smaller one.
  double top = -1.0;
  if (sh.use_gram && dp <= 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sh.gram, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success) top = es.eigenvalues().maxCoeff();
  } else if (n <= 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x * x.transpose(),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success) top = es.eigenvalues().maxCoeff();
  }
  const double lipschitz = top > 0.0 ? 2.0 * top / sh.n : 0.0;
  sh.step0 = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;
  return sh;
}

Eigen::VectorXd apply_prox(const PenaltySpec& spec, const Eigen::VectorXd& v, double t) {
  if (t > 0.0) return penalty_prox(spec, v, t);
  return v;  // lambda = 0: plain gradient step
}

Eigen::VectorXd fista_row(const SmoothShared& sh, const SmoothRow& row,
                          const PenaltySpec& spec, const FitConfig& config,
                          RowDiagnostics* diag, const Eigen::VectorXd* warm) {
  const Eigen::Index dp = sh.use_gram ? sh.gram.rows() : sh.x->cols();
  const double lambda = config.lambda;

  Eigen::VectorXd x_cur = warm ? *warm : Eigen::VectorXd::Zero(dp);
  Eigen::VectorXd lin_cur = row.lin(x_cur);
  double f_cur = row.value(x_cur, lin_cur);
  double obj_cur = f_cur + (lambda > 0.0 ? lambda * penalty_value(spec, x_cur) : 0.0);

  Eigen::VectorXd x_prev = x_cur, lin_prev = lin_cur;
  double t_momentum = 1.0;
  double eta = sh.step0;

  RowDiagnostics local;
  RowDiagnostics& dg = diag ? *diag : local;
  dg = RowDiagnostics{};
  if (config.record_trace) dg.trace.push_back(obj_cur);

  int iter = 0;
  double residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd y_pt = x_cur, lin_y = lin_cur;
  double f_y = f_cur;
  for (iter = 1; iter <= config.max_iters; ++iter) {
    Eigen::VectorXd g = row.grad(lin_y);
    if (!g.allFinite())
      throw numeric_error("gradient became non-finite at step size " + std::to_string(eta));

    // Backtracking line search on the smooth majorization at y_pt.
    Eigen::VectorXd u, lin_u;
    double f_u = 0.0;
    for (;;) {
      u = apply_prox(spec, y_pt - eta * g, eta * lambda);
      lin_u = row.lin(u);
      f_u = row.value(u, lin_u);
      const Eigen::VectorXd du = u - y_pt;
      const double bound =
          f_y + g.dot(du) + du.squaredNorm() / (2.0 * eta) + 1e-12 * std::abs(f_y);
      if (f_u <= bound || du.squaredNorm() == 0.0) break;
      eta *= config.backtrack_factor;
      if (eta < 1e-18)
        throw numeric_error("line search underflow (step size " + std::to_string(eta) + ")");
    }
    if (!std::isfinite(f_u))
      throw numeric_error("objective became non-finite at step size " + std::to_string(eta));
    const double obj_u =
        f_u + (lambda > 0.0 ? lambda * penalty_value(spec, u) : 0.0);

    bool accepted = obj_u <= obj_cur;
    if (accepted) {
      x_prev.swap(x_cur);
      lin_prev.swap(lin_cur);
      x_cur = u;
      lin_cur = lin_u;
      f_cur = f_u;
      obj_cur = obj_u;
    }
    if (config.record_trace) dg.trace.push_back(obj_cur);

    // Fixed-point residual at the accepted iterate; its gradient is free in
    // Gram form, and the prox is cheap relative to a matrix product.
    const Eigen::VectorXd g_cur = row.grad(lin_cur);
    const Eigen::VectorXd step_cur = apply_prox(spec, x_cur - eta * g_cur, eta * lambda);
    residual = (x_cur - step_cur).norm();
    if (residual <= config.tol * std::max(1.0, x_cur.norm())) {
      dg.converged = true;
      break;
    }

    if (!accepted && config.restart) {
      // Objective would have increased: drop momentum and take a plain
      // descent step from the current point next round.
      t_momentum = 1.0;
      y_pt = x_cur;
      lin_y = lin_cur;
      f_y = f_cur;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
    const double ratio = (t_momentum - 1.0) / t_next;
    t_momentum = t_next;
    y_pt = x_cur + ratio * (x_cur - x_prev);
    lin_y = lin_cur + ratio * (lin_cur - lin_prev);
    f_y = row.value(y_pt, lin_y);
  }

  dg.iterations = std::min(iter, config.max_iters);
  dg.objective = obj_cur;
  dg.residual = residual;
  if (config.record_trace) {
    for (std::size_t i = 1; i < dg.trace.size(); ++i)
      if (dg.trace[i] > dg.trace[i - 1] * (1.0 + 1e-12) + 1e-300) dg.monotone = false;
  }
  return x_cur;
}

}  // namespace

Eigen::VectorXd fit_row(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const PenaltySpec& spec, const FitConfig& config,
                        RowDiagnostics* diag, const Eigen::VectorXd* warm) {
  check_fit_config(config);
  spec.validate();
  if (x.rows() != y.size()) throw data_error("design and response row counts differ");
  if (x.rows() < 1) throw data_error("empty regression data");
  if (spec.dim != x.cols())
    throw data_error("penalty dimension " + std::to_string(spec.dim) +
                     " does not match design width " + std::to_string(x.cols()));
  if (!x.allFinite() || !y.allFinite()) throw data_error("regression data has non-finite entries");

  SmoothShared sh = prepare_shared(x, config);
  SmoothRow row;
  row.sh = &sh;
  row.xty.noalias() = x.transpose() * y;
  row.y = &y;
  row.yy = y.squaredNorm();
  return fista_row(sh, row, spec, config, diag, warm);
}

FitResult fit(const RegressionData& data, const PenaltySpec& spec, const FitConfig& config,
              const Eigen::MatrixXd* warm) {
  check_fit_config(config);
  spec.validate();
  if (data.x.rows() != data.y.rows()) throw data_error("design and response row counts differ");
  if (data.x.rows() < 1) throw data_error("empty regression data");
  if (spec.dim != data.x.cols())
    throw data_error("penalty dimension " + std::to_string(spec.dim) +
                     " does not match design width " + std::to_string(data.x.cols()));
  if (!data.x.allFinite() || !data.y.allFinite())
    throw data_error("regression data has non-finite entries");
  const Eigen::Index p = data.y.cols();
  if (warm && (warm->rows() != data.x.cols() || warm->cols() != p))
    throw data_error("warm start has the wrong shape");

  SmoothShared sh = prepare_shared(data.x, config);
  FitResult out;
  out.lambda = config.lambda;
  out.b_hat.resize(data.x.cols(), p);
  out.per_row.resize(static_cast<std::size_t>(p));

  parallel_for(static_cast<std::size_t>(p), config.threads, [&](std::size_t j) {
    const Eigen::Index col = static_cast<Eigen::Index>(j);
    SmoothRow row;
    row.sh = &sh;
    Eigen::VectorXd yj = data.y.col(col);
    row.xty.noalias() = data.x.transpose() * yj;
    row.y = &yj;
    row.yy = yj.squaredNorm();
    Eigen::VectorXd w;
    const Eigen::VectorXd* warm_col = nullptr;
    if (warm) {
      w = warm->col(col);
      warm_col = &w;
    }
    out.b_hat.col(col) = fista_row(sh, row, spec, config, &out.per_row[j], warm_col);
  });
  return out;
}

double lambda_max(const RegressionData& data, const PenaltySpec& spec) {
  spec.validate();
  if (!spec.is_norm())
    throw config_error("no finite zero-solution threshold for a squared penalty");
  if (data.x.rows() != data.y.rows() || data.x.rows() < 1)
    throw data_error("invalid regression data");
  const double n = static_cast<double>(data.x.rows());
  double best = 0.0;
  for (Eigen::Index j = 0; j < data.y.cols(); ++j) {
    Eigen::VectorXd c = (2.0 / n) * (data.x.transpose() * data.y.col(j));
    best = std::max(best, dual_norm(spec, c));
  }
  return best;
}

std::vector<double> lambda_grid(double l_max, int count, double ratio) {
  if (!(l_max > 0.0)) throw config_error("grid needs a positive maximum lambda");
  if (count < 1) throw config_error("grid needs at least one value");
  if (!(ratio > 0.0) || ratio > 1.0) throw config_error("grid ratio must lie in (0, 1]");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = l_max;
    return grid;
  }
  const double log_hi = std::log(l_max), log_lo = std::log(l_max * ratio);
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::exp(log_hi + (log_lo - log_hi) * static_cast<double>(i) / (count - 1));
  return grid;
}

CvResult cross_validate(const RegressionData& data, const PenaltySpec& spec,
                        const std::vector<double>& grid, int folds,
                        const FitConfig& base) {
  if (grid.empty()) throw config_error("cross-validation needs a non-empty grid");
  if (folds < 2) throw config_error("cross-validation needs at least two folds");
  const Eigen::Index n = data.n();
  if (n < folds) throw data_error("fewer rows than folds");

  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());

  CvResult out;
  out.grid = sorted;
  out.cv_mse.assign(sorted.size(), 0.0);

  for (int f = 0; f < folds; ++f) {
    const Eigen::Index lo = n * f / folds;
    const Eigen::Index hi = n * (f + 1) / folds;
    const Eigen::Index n_test = hi - lo;
    if (n_test < 1) throw data_error("empty cross-validation fold");
    const Eigen::Index n_train = n - n_test;
    if (n_train < 1) throw data_error("empty training split");

    RegressionData train;
    train.x.resize(n_train, data.x.cols());
    train.y.resize(n_train, data.y.cols());
    train.x.topRows(lo) = data.x.topRows(lo);
    train.y.topRows(lo) = data.y.topRows(lo);
    train.x.bottomRows(n - hi) = data.x.bottomRows(n - hi);
    train.y.bottomRows(n - hi) = data.y.bottomRows(n - hi);

    RegressionData test;
    test.x = data.x.middleRows(lo, n_test);
    test.y = data.y.middleRows(lo, n_test);

    FitConfig cfg = base;
    Eigen::MatrixXd warm;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      cfg.lambda = sorted[i];
      FitResult res = fit(train, spec, cfg, warm.size() ? &warm : nullptr);
      warm = res.b_hat;
      out.cv_mse[i] += prediction_mse(test, res.b_hat);
    }
  }
  for (double& v : out.cv_mse) v /= folds;

  std::size_t best = 0;  // grid is descending, so '<' keeps the largest lambda on ties
  for (std::size_t i = 1; i < out.cv_mse.size(); ++i)
    if (out.cv_mse[i] < out.cv_mse[best]) best = i;
  out.best_index = best;
  out.best_lambda = sorted[best];
  return out;
}

double nonzero_percent(const Eigen::MatrixXd& b_hat, double zero_tol) {
  if (b_hat.size() == 0) return 0.0;
  const Eigen::Index nz = (b_hat.cwiseAbs().array() > zero_tol).count();
  return 100.0 * static_cast<double>(nz) / static_cast<double>(b_hat.size());
}

double prediction_mse(const RegressionData& data, const Eigen::MatrixXd& b_hat) {
  if (data.x.cols() != b_hat.rows() || data.y.cols() != b_hat.cols())
    throw data_error("coefficient matrix shape does not match data");
  return (data.y - data.x * b_hat).squaredNorm() /
         (static_cast<double>(data.n()) * static_cast<double>(data.y.cols()));
}

}  // namespace regvar
