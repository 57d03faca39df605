#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "regvar/errors.hpp"
#include "regvar/experiments.hpp"
#include "regvar/model.hpp"
#include "regvar/penalties.hpp"
#include "regvar/rng.hpp"
#include "regvar/solver.hpp"

using namespace regvar;

namespace {

RegressionData make_data(Eigen::Index n, Eigen::Index dp, Eigen::Index p,
                           std::uint64_t seed, double noise = 0.1) {
  GaussianRng rng(seed);
  RegressionData data;
  data.x.resize(n, dp);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dp; ++j) data.x(i, j) = rng();
  Eigen::MatrixXd b(dp, p);
  for (Eigen::Index i = 0; i < dp; ++i)
    for (Eigen::Index j = 0; j < p; ++j) b(i, j) = rng();
  data.y = data.x * b;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) data.y(i, j) += noise * rng();
  return data;
}

// Design with orthonormal columns scaled so X^T X = N I.
Eigen::MatrixXd orthonormal_design(Eigen::Index n, Eigen::Index dp, std::uint64_t seed) {
  GaussianRng rng(seed);
  Eigen::MatrixXd raw(n, dp);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dp; ++j) raw(i, j) = rng();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, dp);
  return std::sqrt(static_cast<double>(n)) * q;
}

std::vector<PenaltySpec> norm_specs(int dp) {
  return {
      PenaltySpec::l1(dp),
      PenaltySpec::group_lasso_blocks(dp, std::vector<int>(static_cast<std::size_t>(dp / 2), 2)),
      PenaltySpec::sparse_group_lasso_blocks(dp, 0.4, std::vector<int>(static_cast<std::size_t>(dp / 2), 2)),
      PenaltySpec::owl_linear(dp, 2.0, 1.0),
  };
}

}  // namespace

TEST_CASE("zero-threshold contract") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    RegressionData data = make_data(60, 8, 2, mix_seed(1000, seed), 0.5);
    for (const PenaltySpec& spec : norm_specs(8)) {
      const double l_max = lambda_max(data, spec);
      REQUIRE(l_max > 0.0);
      FitConfig cfg;
      cfg.lambda = 1.01 * l_max;
      FitResult at_top = fit(data, spec, cfg);
      CHECK(at_top.b_hat.cwiseAbs().maxCoeff() == 0.0);
      cfg.lambda = 0.5 * l_max;
      FitResult below = fit(data, spec, cfg);
      CHECK(below.b_hat.cwiseAbs().maxCoeff() > 0.0);
    }
  }
  SUBCASE("zero response gives a zero threshold") {
    RegressionData data = make_data(30, 4, 1, 9);
    data.y.setZero();
    CHECK(lambda_max(data, PenaltySpec::l1(4)) == 0.0);
  }
  SUBCASE("explicit arithmetic") {
    RegressionData data;
    data.x.resize(2, 3);
    data.x << 3.0, -6.0, 1.0, 0.0, 0.0, 0.0;
    data.y.resize(2, 1);
    data.y << 1.0, 0.0;
    // X^T y = (3, -6, 1), N = 2, so the threshold is max |(2/2) X^T y| = 6.
    CHECK(lambda_max(data, PenaltySpec::l1(3)) == doctest::Approx(6.0).epsilon(1e-12));
  }
  SUBCASE("squared penalties have no threshold") {
    RegressionData data = make_data(20, 4, 1, 10);
    CHECK_THROWS_AS(lambda_max(data, PenaltySpec::ridge_sq(4)), config_error);
  }
}

TEST_CASE("unpenalized fits match least squares") {
  RegressionData data = make_data(120, 10, 3, 2020, 0.3);
  FitConfig cfg;
  cfg.lambda = 0.0;
  cfg.tol = 1e-10;
  cfg.max_iters = 50000;
  FitResult res = fit(data, PenaltySpec::l1(10), cfg);
  for (Eigen::Index j = 0; j < 3; ++j) {
    Eigen::VectorXd ols = oracle::least_squares(data.x, data.y.col(j));
    CHECK((res.b_hat.col(j) - ols).norm() <= 1e-6 * std::max(1.0, ols.norm()));
  }
}

TEST_CASE("orthonormal-design closed form") {
  const Eigen::Index n = 64, dp = 6;
  Eigen::MatrixXd x = orthonormal_design(n, dp, 33);
  GaussianRng rng(34);
  Eigen::VectorXd y = x * rng.vector(dp) + 0.2 * rng.vector(n);
  Eigen::VectorXd ols = x.transpose() * y / static_cast<double>(n);

  FitConfig cfg;
  cfg.lambda = 0.8;
  cfg.tol = 1e-12;
  cfg.max_iters = 20000;
  RowDiagnostics diag;
  Eigen::VectorXd beta = fit_row(x, y, PenaltySpec::l1(dp), cfg, &diag);
  REQUIRE(diag.converged);
  for (Eigen::Index i = 0; i < dp; ++i) {
    const double soft =
        std::copysign(std::max(std::abs(ols[i]) - cfg.lambda / 2.0, 0.0), ols[i]);
    CHECK(beta[i] == doctest::Approx(soft).epsilon(1e-8));
  }
}

TEST_CASE("fit basics") {
  SUBCASE("zero response gives zero coefficients at any positive lambda") {
    RegressionData data = make_data(40, 6, 2, 44);
    data.y.setZero();
    FitConfig cfg;
    cfg.lambda = 0.05;
    CHECK(fit(data, PenaltySpec::l1(6), cfg).b_hat.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("identical responses give identical coefficient columns") {
    RegressionData data = make_data(50, 6, 2, 45, 0.2);
    data.y.col(1) = data.y.col(0);
    FitConfig cfg;
    cfg.lambda = 0.1;
    FitResult res = fit(data, PenaltySpec::l1(6), cfg);
    CHECK((res.b_hat.col(0) - res.b_hat.col(1)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("noiseless recovery at vanishing lambda") {
    GaussianRng rng(46);
    RegressionData data;
    data.x.resize(200, 6);
    for (Eigen::Index i = 0; i < 200; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) data.x(i, j) = rng();
    Eigen::MatrixXd b_true(6, 2);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) b_true(i, j) = rng();
    data.y = data.x * b_true;
    FitConfig cfg;
    cfg.lambda = 1e-12;
    cfg.tol = 1e-10;
    cfg.max_iters = 50000;
    FitResult res = fit(data, PenaltySpec::l1(6), cfg);
    CHECK((res.b_hat - b_true).norm() <= 1e-4);
  }
}

TEST_CASE("solver diagnostics contracts") {
  RegressionData data = make_data(80, 10, 2, 57, 0.4);
  const PenaltySpec spec = PenaltySpec::l1(10);
  const double l_max = lambda_max(data, spec);

  SUBCASE("objective trace is non-increasing and the fixed point is tight") {
    FitConfig cfg;
    cfg.lambda = 0.1 * l_max;
    cfg.record_trace = true;
    FitResult res = fit(data, spec, cfg);
    for (const RowDiagnostics& dg : res.per_row) {
      REQUIRE(dg.converged);
      CHECK(dg.monotone);
      for (std::size_t i = 1; i < dg.trace.size(); ++i)
        CHECK(dg.trace[i] <= dg.trace[i - 1] * (1.0 + 1e-12) + 1e-300);
    }
    // one extra prox-gradient step moves a converged point almost nowhere
    Eigen::MatrixXd gram = data.x.transpose() * data.x;
    const double lips = 2.0 * oracle::max_eig(gram) / static_cast<double>(data.n());
    const double eta = 1.0 / lips;
    for (Eigen::Index j = 0; j < 2; ++j) {
      Eigen::VectorXd beta = res.b_hat.col(j);
      Eigen::VectorXd grad = (2.0 / static_cast<double>(data.n())) *
                             (data.x.transpose() * (data.x * beta - data.y.col(j)));
      Eigen::VectorXd next = penalty_prox(spec, beta - eta * grad, eta * cfg.lambda);
      CHECK((next - beta).norm() <= 2.0 * cfg.tol * std::max(1.0, beta.norm()));
    }
  }

  SUBCASE("warm starts along the path match cold starts") {
    FitConfig cfg;
    cfg.record_trace = false;
    Eigen::MatrixXd warm;
    for (double lam : lambda_grid(l_max, 8, 1e-2)) {
      cfg.lambda = lam;
      FitResult warm_fit = fit(data, spec, cfg, warm.size() ? &warm : nullptr);
      warm = warm_fit.b_hat;
      FitResult cold_fit = fit(data, spec, cfg);
      for (std::size_t r = 0; r < warm_fit.per_row.size(); ++r) {
        const double ow = warm_fit.per_row[r].objective;
        const double oc = cold_fit.per_row[r].objective;
        CHECK(std::abs(ow - oc) <= 10.0 * cfg.tol * std::max(1.0, std::abs(oc)));
      }
    }
  }

  SUBCASE("threading does not change the result") {
    FitConfig serial;
    serial.lambda = 0.05 * l_max;
    FitConfig parallel = serial;
    parallel.threads = 4;
    FitResult a = fit(data, spec, serial);
    FitResult b = fit(data, spec, parallel);
    CHECK((a.b_hat - b.b_hat).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("invalid configurations are rejected") {
    FitConfig bad;
    bad.lambda = -1.0;
    CHECK_THROWS_AS(fit(data, spec, bad), config_error);
    FitConfig bad_tol;
    bad_tol.tol = 0.0;
    CHECK_THROWS_AS(fit(data, spec, bad_tol), config_error);
    CHECK_THROWS_AS(fit(data, PenaltySpec::l1(3), FitConfig{}), data_error);
  }
}

TEST_CASE("lambda grids") {
  std::vector<double> two = lambda_grid(1.0, 2, 0.01);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == doctest::Approx(1.0));
  CHECK(two[1] == doctest::Approx(0.01));

  std::vector<double> three = lambda_grid(1.0, 3, 0.01);
  REQUIRE(three.size() == 3);
  CHECK(three[0] == doctest::Approx(1.0));
  CHECK(three[1] == doctest::Approx(0.1));
  CHECK(three[2] == doctest::Approx(0.01));

  std::vector<double> dflt = lambda_grid(2.5);
  REQUIRE(dflt.size() == 30);
  for (std::size_t i = 1; i < dflt.size(); ++i) CHECK(dflt[i] < dflt[i - 1]);
  CHECK(dflt.front() == doctest::Approx(2.5));
  CHECK(dflt.back() == doctest::Approx(2.5e-3));

  CHECK_THROWS_AS(lambda_grid(0.0, 5, 0.1), config_error);
  CHECK_THROWS_AS(lambda_grid(-1.0, 5, 0.1), config_error);
}

TEST_CASE("cross-validation") {
  SUBCASE("a single-value grid is returned unchanged") {
    RegressionData data = make_data(40, 4, 1, 71, 0.3);
    CvResult cv = cross_validate(data, PenaltySpec::l1(4), {0.37}, 4);
    CHECK(cv.best_lambda == 0.37);
    REQUIRE(cv.cv_mse.size() == 1);
  }
  SUBCASE("pure noise prefers heavy regularization") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      VarModel white;
      white.coeffs = {Eigen::MatrixXd::Zero(3, 3)};
      white.sigma = Eigen::MatrixXd::Identity(3, 3);
      RegressionData data = build_regression(simulate(white, 100, 50, mix_seed(83, seed)), 1);
      const PenaltySpec spec = PenaltySpec::l1(3);
      std::vector<double> grid = lambda_grid(lambda_max(data, spec), 30, 1e-3);
      CvResult cv = cross_validate(data, spec, grid, 5);
      if (cv.best_index < grid.size() / 3) ++hits;
    }
    CHECK(hits >= 16);
  }
  SUBCASE("strong signal tracks the hold-out oracle") {
    VarModel m = oracle::random_model(4, 1, 0.9, 91, false);
    RegressionData all = build_regression(simulate(m, 400, 200, 17), 1);
    const Eigen::Index n_train = 320;
    RegressionData train{all.x.topRows(n_train), all.y.topRows(n_train)};
    RegressionData test{all.x.bottomRows(all.n() - n_train),
                        all.y.bottomRows(all.n() - n_train)};
    const PenaltySpec spec = PenaltySpec::l1(4);
    std::vector<double> grid = lambda_grid(lambda_max(train, spec), 20, 1e-3);

    CvResult cv = cross_validate(train, spec, grid, 5);
    FitConfig cfg;
    Eigen::MatrixXd warm;
    double oracle_mse = std::numeric_limits<double>::infinity();
    double cv_mse = std::numeric_limits<double>::infinity();
    for (double lam : grid) {
      cfg.lambda = lam;
      FitResult res = fit(train, spec, cfg, warm.size() ? &warm : nullptr);
      warm = res.b_hat;
      const double mse = prediction_mse(test, res.b_hat);
      oracle_mse = std::min(oracle_mse, mse);
      if (lam == cv.best_lambda) cv_mse = mse;
    }
    CHECK(cv_mse <= 1.10 * oracle_mse);
  }
  SUBCASE("degenerate fold layouts are rejected") {
    RegressionData data = make_data(4, 2, 1, 99);
    CHECK_THROWS_AS(cross_validate(data, PenaltySpec::l1(2), {0.1}, 5), data_error);
    CHECK_THROWS_AS(cross_validate(data, PenaltySpec::l1(2), {}, 2), config_error);
  }
}

TEST_CASE("sparsity reporting") {
  CHECK(nonzero_percent(Eigen::MatrixXd::Zero(4, 4)) == 0.0);
  CHECK(nonzero_percent(Eigen::MatrixXd::Constant(4, 4, 0.5)) == 100.0);
  Eigen::MatrixXd half = Eigen::MatrixXd::Zero(2, 2);
  half(0, 0) = 1.0;
  half(1, 1) = 1e-12;  // below the zero tolerance
  CHECK(nonzero_percent(half) == doctest::Approx(25.0));

  SUBCASE("prediction error rejects mismatched shapes") {
    RegressionData data = make_data(20, 4, 2, 404);
    CHECK_THROWS_AS(prediction_mse(data, Eigen::MatrixXd::Zero(3, 2)), data_error);
    CHECK(prediction_mse(data, Eigen::MatrixXd::Zero(4, 2)) ==
          doctest::Approx(data.y.squaredNorm() / (20.0 * 2.0)));
  }

  SUBCASE("planted support is recovered within two entries per row") {
    VarModel m = make_ground_truth(PenaltyKind::L1, 6, 1, TruthStructure{2, 0, 0}, 0.8, 313);
    RegressionData data = build_regression(simulate(m, 800, 300, 314), 1);
    const PenaltySpec spec = PenaltySpec::l1(6);
    FitConfig cfg;
    cfg.lambda = 0.15 * lambda_max(data, spec);
    FitResult res = fit(data, spec, cfg);
    for (Eigen::Index j = 0; j < 6; ++j) {
      const int nnz =
          static_cast<int>((res.b_hat.col(j).cwiseAbs().array() > 1e-8).count());
      CHECK(std::abs(nnz - 2) <= 2);
    }
  }
}
