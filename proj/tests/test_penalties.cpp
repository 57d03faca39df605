#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "regvar/errors.hpp"
#include "regvar/penalties.hpp"
#include "regvar/rng.hpp"

using namespace regvar;

namespace {

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// The norm specs exercised by the generic property checks, all of dimension 3.
std::vector<PenaltySpec> norm_specs3() {
  return {
      PenaltySpec::l1(3),
      PenaltySpec::group_lasso_blocks(3, {2, 1}),
      PenaltySpec::sparse_group_lasso_blocks(3, 0.5, {2, 1}),
      PenaltySpec::owl(vec3(3.0, 2.0, 1.0)),
  };
}

}  // namespace

TEST_CASE("penalty values") {
  CHECK(penalty_value(PenaltySpec::l1(3), vec3(1, -2, 3)) == doctest::Approx(6.0));
  CHECK(penalty_value(PenaltySpec::group_lasso_blocks(3, {2, 1}), vec3(3, 4, 5)) ==
        doctest::Approx(10.0));
  CHECK(penalty_value(PenaltySpec::owl(vec3(3, 2, 1)), vec3(1, -2, 3)) ==
        doctest::Approx(14.0));
  CHECK(penalty_value(PenaltySpec::ridge_sq(3), vec3(1, -2, 2)) == doctest::Approx(9.0));
  CHECK(penalty_value(PenaltySpec::sparse_group_lasso_blocks(3, 0.5, {2, 1}),
                      vec3(3, 4, 5)) == doctest::Approx(0.5 * 12.0 + 0.5 * 10.0));
}

TEST_CASE("penalty value properties") {
  GaussianRng rng(404);
  for (const PenaltySpec& spec : norm_specs3()) {
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd v = rng.vector(3);
      Eigen::VectorXd w = rng.vector(3);
      const double a = rng() * 2.0;
      // absolute homogeneity and the triangle inequality
      CHECK(penalty_value(spec, a * v) ==
            doctest::Approx(std::abs(a) * penalty_value(spec, v)).epsilon(1e-12));
      CHECK(penalty_value(spec, v + w) <=
            penalty_value(spec, v) + penalty_value(spec, w) + 1e-12);
    }
  }
}

TEST_CASE("prox closed-form cases") {
  SUBCASE("entrywise soft threshold") {
    Eigen::VectorXd one(1);
    one << 3.0;
    CHECK(penalty_prox(PenaltySpec::l1(1), one, 1.0)(0) == doctest::Approx(2.0));
    one << 0.5;
    CHECK(penalty_prox(PenaltySpec::l1(1), one, 1.0)(0) == 0.0);
    one << -2.0;
    CHECK(penalty_prox(PenaltySpec::l1(1), one, 0.5)(0) == doctest::Approx(-1.5));
  }
  SUBCASE("group kill when the threshold covers the block norm") {
    PenaltySpec spec = PenaltySpec::group_lasso_blocks(2, {2});
    Eigen::VectorXd u = penalty_prox(spec, vec2(3, 4), 10.0);
    CHECK(u.cwiseAbs().maxCoeff() == 0.0);
    // below the kill threshold the block shrinks toward zero
    Eigen::VectorXd shrunk = penalty_prox(spec, vec2(3, 4), 1.0);
    CHECK(shrunk(0) == doctest::Approx(3.0 * 0.8).epsilon(1e-12));
    CHECK(shrunk(1) == doctest::Approx(4.0 * 0.8).epsilon(1e-12));
  }
  SUBCASE("ordered weights keep the sorted candidate when already monotone") {
    PenaltySpec spec = PenaltySpec::owl(vec2(2.0, 1.0));
    Eigen::VectorXd u = penalty_prox(spec, vec2(5, 1), 1.0);
    CHECK(u(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(u(1) == 0.0);
    Eigen::VectorXd g = oracle::grid_prox(spec, vec2(5, 1), 1.0);
    CHECK((u - g).cwiseAbs().maxCoeff() <= 2e-3);
  }
  SUBCASE("squared ridge shrinks multiplicatively") {
    Eigen::VectorXd u = penalty_prox(PenaltySpec::ridge_sq(2), vec2(3, -4), 0.5);
    CHECK(u(0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(u(1) == doctest::Approx(-2.0).epsilon(1e-12));
  }
  SUBCASE("nonpositive step is rejected") {
    CHECK_THROWS_AS(penalty_prox(PenaltySpec::l1(2), vec2(1, 2), 0.0), config_error);
  }
}

TEST_CASE("prox against the dense-grid oracle") {
  GaussianRng rng(505);
  std::vector<PenaltySpec> specs = norm_specs3();
  specs.push_back(PenaltySpec::ridge_sq(3));
  specs.push_back(PenaltySpec::sparse_group_lasso_blocks(3, 0.3, {1, 2}));
  for (const PenaltySpec& spec : specs) {
    for (int trial = 0; trial < 8; ++trial) {
      Eigen::VectorXd v = 2.0 * rng.vector(3);
      const double t = 0.2 + 0.4 * trial * 0.125;
      Eigen::VectorXd u = penalty_prox(spec, v, t);
      Eigen::VectorXd g = oracle::grid_prox(spec, v, t);
      CHECK((u - g).cwiseAbs().maxCoeff() <= 2e-3);
    }
  }
}

TEST_CASE("prox optimality and stability properties") {
  GaussianRng rng(606);
  for (const PenaltySpec& spec : norm_specs3()) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd v = 3.0 * rng.vector(3);
      const double t = 0.1 + std::abs(rng());
      Eigen::VectorXd u = penalty_prox(spec, v, t);
      const double ru = penalty_value(spec, u);
      // (v - u)/t is a subgradient of R at u
      for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd w = 3.0 * rng.vector(3);
        CHECK(penalty_value(spec, w) >= ru + (v - u).dot(w - u) / t - 1e-9);
      }
      // nonexpansiveness
      Eigen::VectorXd v2 = 3.0 * rng.vector(3);
      Eigen::VectorXd u2 = penalty_prox(spec, v2, t);
      CHECK((u - u2).norm() <= (v - v2).norm() + 1e-12);
    }
  }
}

TEST_CASE("dual norms") {
  CHECK(dual_norm(PenaltySpec::l1(3), vec3(1, -4, 2)) == doctest::Approx(4.0));
  CHECK(dual_norm(PenaltySpec::group_lasso_blocks(3, {2, 1}), vec3(3, 4, 12)) ==
        doctest::Approx(12.0));
  CHECK(dual_norm(PenaltySpec::owl(vec2(2.0, 1.0)), vec2(5, 1)) ==
        doctest::Approx(2.5).epsilon(1e-12));
  CHECK_THROWS_AS(dual_norm(PenaltySpec::ridge_sq(2), vec2(1, 1)), config_error);

  SUBCASE("matches the random-search oracle") {
    GaussianRng rng(707);
    std::vector<PenaltySpec> specs = {
        PenaltySpec::owl(vec3(3.0, 2.0, 1.0)),
        PenaltySpec::sparse_group_lasso_blocks(3, 0.5, {2, 1}),
    };
    int which = 0;
    for (const PenaltySpec& spec : specs) {
      for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd v = 2.0 * rng.vector(3);
        const double dual = dual_norm(spec, v);
        const double search = oracle::dual_search(
            spec, v, 200000, mix_seed(11, static_cast<std::uint64_t>(which), static_cast<std::uint64_t>(trial)));
        CHECK(dual >= search - 1e-12);
        CHECK(dual <= 1.005 * search);
      }
      ++which;
    }
  }
  SUBCASE("generalized Cauchy-Schwarz pairing") {
    GaussianRng rng(808);
    for (const PenaltySpec& spec : norm_specs3()) {
      for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd v = 2.0 * rng.vector(3);
        Eigen::VectorXd u = 2.0 * rng.vector(3);
        CHECK(v.dot(u) <= penalty_value(spec, u) * dual_norm(spec, v) + 1e-9);
      }
    }
  }
  SUBCASE("zero input") {
    for (const PenaltySpec& spec : norm_specs3())
      CHECK(dual_norm(spec, Eigen::VectorXd::Zero(3)) == 0.0);
  }
}

TEST_CASE("family reductions") {
  GaussianRng rng(909);
  SUBCASE("constant ordered weights equal a scaled absolute-value norm") {
    const double c = 0.7;
    PenaltySpec owl = PenaltySpec::owl(Eigen::VectorXd::Constant(3, c));
    PenaltySpec l1 = PenaltySpec::l1(3);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd v = 2.0 * rng.vector(3);
      const double t = 0.2 + std::abs(rng());
      CHECK(penalty_value(owl, v) ==
            doctest::Approx(c * penalty_value(l1, v)).epsilon(1e-12));
      CHECK((penalty_prox(owl, v, t) - penalty_prox(l1, v, c * t)).cwiseAbs().maxCoeff() <=
            1e-12);
      CHECK(dual_norm(owl, v) == doctest::Approx(dual_norm(l1, v) / c).epsilon(1e-12));
    }
  }
  SUBCASE("mixing parameter collapses to the pure norms") {
    PenaltySpec sgl1 = PenaltySpec::sparse_group_lasso_blocks(4, 1.0, {2, 2});
    PenaltySpec sgl0 = PenaltySpec::sparse_group_lasso_blocks(4, 0.0, {2, 2});
    PenaltySpec l1 = PenaltySpec::l1(4);
    PenaltySpec gl = PenaltySpec::group_lasso_blocks(4, {2, 2});
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd v = 2.0 * rng.vector(4);
      const double t = 0.2 + std::abs(rng());
      CHECK(penalty_value(sgl1, v) == doctest::Approx(penalty_value(l1, v)).epsilon(1e-12));
      CHECK(penalty_value(sgl0, v) == doctest::Approx(penalty_value(gl, v)).epsilon(1e-12));
      CHECK((penalty_prox(sgl1, v, t) - penalty_prox(l1, v, t)).cwiseAbs().maxCoeff() <=
            1e-12);
      CHECK((penalty_prox(sgl0, v, t) - penalty_prox(gl, v, t)).cwiseAbs().maxCoeff() <=
            1e-12);
      CHECK(dual_norm(sgl1, v) == doctest::Approx(dual_norm(l1, v)).epsilon(1e-12));
      CHECK(dual_norm(sgl0, v) == doctest::Approx(dual_norm(gl, v)).epsilon(1e-12));
    }
  }
}

TEST_CASE("structure statistics") {
  SUBCASE("zero rows") {
    StructureStats st = structure_stats(PenaltySpec::l1(4), Eigen::MatrixXd::Zero(2, 4));
    CHECK(st.s == 0);
    CHECK(st.s_g == 0);
  }
  SUBCASE("dense row") {
    StructureStats st =
        structure_stats(PenaltySpec::l1(4), Eigen::MatrixXd::Constant(1, 4, 1.0));
    CHECK(st.s == 4);
  }
  SUBCASE("planted sparse rows") {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(3, 8);
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 4; ++k) rows(r, (r + 2 * k) % 8) = 1.0;
    StructureStats st = structure_stats(PenaltySpec::l1(8), rows);
    CHECK(st.s == 4);
  }
  SUBCASE("group structure") {
    PenaltySpec spec = PenaltySpec::group_lasso_blocks(6, {2, 2, 2});
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, 6);
    rows(0, 0) = 1.0;            // touches group 0 only
    rows(1, 2) = rows(1, 5) = 1.0;  // touches groups 1 and 2
    StructureStats st = structure_stats(spec, rows);
    CHECK(st.s_g == 2);
    CHECK(st.m == 2);
    CHECK(st.k_groups == 3);
  }
  SUBCASE("ordered-weight summary") {
    StructureStats st =
        structure_stats(PenaltySpec::owl(vec3(3, 2, 1)), Eigen::MatrixXd::Constant(1, 3, 1.0));
    CHECK(st.c1 == doctest::Approx(3.0));
    CHECK(st.c_bar == doctest::Approx(2.0));
  }
}

TEST_CASE("compatibility constants") {
  StructureStats st;
  st.s = 4;
  CHECK(compat_constant(PenaltySpec::l1(8), st) == doctest::Approx(8.0));
  StructureStats stg;
  stg.s_g = 9;
  CHECK(compat_constant(PenaltySpec::group_lasso_blocks(18, {9, 9}), stg) ==
        doctest::Approx(12.0));
  StructureStats sts;
  sts.s = 4;
  sts.s_g = 1;
  CHECK(compat_constant(PenaltySpec::sparse_group_lasso_blocks(8, 0.5, {4, 4}), sts) ==
        doctest::Approx(6.0));
  StructureStats sto;
  sto.s = 4;
  sto.c1 = 3.0;
  sto.c_bar = 2.0;
  CHECK(compat_constant(PenaltySpec::owl(vec3(3, 2, 1)), sto) ==
        doctest::Approx(2.0 * 9.0 * 2.0 / 2.0));
  CHECK_THROWS_AS(compat_constant(PenaltySpec::ridge_sq(3), st), config_error);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(PenaltySpec::group_lasso_blocks(5, {2, 2}).validate(), config_error);
  CHECK_THROWS_AS(PenaltySpec::sparse_group_lasso_blocks(4, 1.5, {2, 2}).validate(),
                  config_error);
  CHECK_THROWS_AS(PenaltySpec::owl(vec2(1.0, 2.0)).validate(), config_error);  // increasing
  CHECK_THROWS_AS(PenaltySpec::owl(vec2(0.0, 0.0)).validate(), config_error);  // c1 = 0
  CHECK_THROWS_AS(penalty_value(PenaltySpec::l1(3), vec2(1, 2)), data_error);

  PenaltySpec overlapping = PenaltySpec::group_lasso_blocks(4, {2, 2});
  overlapping.groups[1] = {1, 3};  // index 1 covered twice, index 2 uncovered
  CHECK_THROWS_AS(overlapping.validate(), config_error);
}
