#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "regvar/config.hpp"
#include "regvar/errors.hpp"
#include "regvar/experiments.hpp"
#include "regvar/model.hpp"
#include "regvar/penalties.hpp"
#include "regvar/rng.hpp"
#include "regvar/series_io.hpp"
#include "regvar/svg.hpp"

using namespace regvar;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "regvar_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  return path.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

bool throws_mentioning(const std::function<void()>& fn, const std::string& fragment) {
  try {
    fn();
  } catch (const data_error& e) {
    return std::string(e.what()).find(fragment) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("csv series loading") {
  SUBCASE("minimal two-row file") {
    const std::string path = write_file("mini.csv", "t\n1\n3\n");
    SeriesFile f = load_csv(path, false);
    REQUIRE(f.names.size() == 1);
    CHECK(f.names[0] == "t");
    REQUIRE(f.values.rows() == 2);
    CHECK(f.values(0, 0) == 1.0);
    CHECK(f.values(1, 0) == 3.0);
    CHECK(!f.standardized);
  }
  SUBCASE("constant columns standardize to zero") {
    const std::string path = write_file("const.csv", "a,b\n5,1\n5,2\n5,3\n");
    SeriesFile f = load_csv(path, true);
    CHECK(f.values.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(f.standardized);
    CHECK(f.means[0] == 5.0);
  }
  SUBCASE("standardized columns have mean zero and unit variance") {
    std::ostringstream text;
    text << "a,b\n";
    GaussianRng rng(515);
    for (int i = 0; i < 40; ++i) text << 3.0 + 2.0 * rng() << "," << -1.0 + 0.5 * rng() << "\n";
    SeriesFile f = load_csv(write_file("std.csv", text.str()), true);
    for (Eigen::Index j = 0; j < 2; ++j) {
      CHECK(std::abs(f.values.col(j).mean()) <= 1e-9);
      const double var = f.values.col(j).squaredNorm() / (f.values.rows() - 1);
      CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("trajectory round trip is exact") {
    VarModel m = oracle::random_model(3, 2, 0.8, 606);
    Trajectory traj = simulate(m, 25, 50, 607);
    const std::string path = (scratch_dir() / "traj.csv").string();
    save_trajectory_csv(path, traj);
    SeriesFile f = load_csv(path, false);
    REQUIRE(f.names.size() == 4);
    CHECK(f.names[0] == "t");
    CHECK(f.names[3] == "x3");
    REQUIRE(f.values.rows() == traj.samples.rows());
    CHECK((f.values.rightCols(3) - traj.samples).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < f.values.rows(); ++i)
      CHECK(f.values(i, 0) == static_cast<double>(i));
  }
  SUBCASE("parse failures cite the line") {
    const std::string ragged = write_file("ragged.csv", "a,b\n1,2\n1,2,3\n");
    CHECK(throws_mentioning([&] { load_csv(ragged, false); }, "line 3"));
    const std::string alpha = write_file("alpha.csv", "a\n1\nbanana\n");
    CHECK(throws_mentioning([&] { load_csv(alpha, false); }, "line 3"));
    CHECK(throws_mentioning([&] { load_csv(alpha, false); }, "banana"));
    const std::string single = write_file("single.csv", "a\n1\n");
    CHECK(throws_mentioning([&] { load_csv(single, false); }, "at least 2"));
    CHECK_THROWS_AS(load_csv((scratch_dir() / "missing.csv").string(), false), data_error);
    const std::string headerless = write_file("empty.csv", "");
    CHECK_THROWS_AS(load_csv(headerless, false), data_error);
  }
}

TEST_CASE("matrix and report serialization") {
  SUBCASE("matrix round trip") {
    GaussianRng rng(700);
    Eigen::MatrixXd m(3, 4);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) m(i, j) = rng();
    const std::string path = (scratch_dir() / "mat.csv").string();
    save_matrix_csv(path, m, "c");
    Eigen::MatrixXd back = load_matrix_csv(path);
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 4);
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
    CHECK(first_line(read_file(path)) == "c1,c2,c3,c4");
  }
  SUBCASE("fit diagnostics header and rows") {
    std::vector<RowDiagnostics> rows(2);
    rows[0].iterations = 12;
    rows[0].objective = 0.5;
    rows[0].residual = 1e-9;
    rows[0].converged = true;
    rows[1].iterations = 7;
    rows[1].converged = false;
    const std::string path = (scratch_dir() / "diag.csv").string();
    save_fit_diagnostics_csv(path, rows);
    const std::string text = read_file(path);
    CHECK(first_line(text) == "row,iters,objective,residual,converged");
    CHECK(text.find("1,12,0.5,") != std::string::npos);
    CHECK(text.find("2,7,0,0,0") != std::string::npos);
  }
  SUBCASE("scaling records header and kind names") {
    ScalingRecord rec;
    rec.kind = PenaltyKind::GroupLasso;
    rec.p = 10;
    rec.d = 2;
    rec.n = 400;
    rec.stats.s = 4;
    rec.stats.s_g = 2;
    rec.stats.k_groups = 5;
    rec.stats.m = 4;
    rec.lambda = 0.25;
    rec.lambda_rel = 0.5;
    rec.err_mean = 1.5;
    rec.err_std = 0.125;  // dyadic, so the 17-digit format prints it verbatim
    rec.is_best = true;
    const std::string path = (scratch_dir() / "records.csv").string();
    save_scaling_records_csv(path, {rec});
    const std::string text = read_file(path);
    CHECK(first_line(text) ==
          "kind,p,d,N,s,s_g,K,m,lambda,lambda_rel,err_mean,err_std,is_best");
    CHECK(text.find("gl,10,2,400,4,2,5,4,0.25,0.5,1.5,0.125,1") != std::string::npos);
  }
  SUBCASE("alignment curves serialize point per line") {
    ExpCurve c;
    c.p = 20;
    c.x = {1.0, 2.0};
    c.y = {0.5, 0.25};
    const std::string path = (scratch_dir() / "align.csv").string();
    save_alignment_csv(path, {c});
    const std::string text = read_file(path);
    CHECK(first_line(text) == "rescaled_x,curve_p,err");
    CHECK(text.find("1,20,0.5") != std::string::npos);
    CHECK(text.find("2,20,0.25") != std::string::npos);
  }
}

TEST_CASE("run configuration") {
  const std::set<std::string> schema = {"sim.p",      "sim.steps", "penalty.kind",
                                        "truth.list", "flag.on",   "solver.tol"};
  SUBCASE("comments, blanks, and whitespace are tolerated") {
    RunConfig cfg = RunConfig::parse(
        "# header comment\n"
        "sim.p = 4   # trailing comment\n"
        "\n"
        "  sim.steps=200\n"
        "penalty.kind = l1\n",
        schema);
    CHECK(cfg.get_int("sim.p", 0) == 4);
    CHECK(cfg.get_int("sim.steps", 0) == 200);
    CHECK(cfg.require_string("penalty.kind") == "l1");
    CHECK(cfg.get_int("missing.key", 7) == 7);
    CHECK(!cfg.has("missing.key"));
  }
  SUBCASE("typed accessors") {
    RunConfig cfg = RunConfig::parse(
        "truth.list = 5, 5, 10\nflag.on = yes\nsolver.tol = 1e-7\nsim.steps = 12\n",
        schema);
    const std::vector<int> list = cfg.get_int_list("truth.list");
    REQUIRE(list.size() == 3);
    CHECK(list[0] == 5);
    CHECK(list[2] == 10);
    CHECK(cfg.get_bool("flag.on", false));
    CHECK(!cfg.get_bool("flag.off", false));
    CHECK(cfg.get_double("solver.tol", 0.0) == 1e-7);
    CHECK(cfg.get_u64("sim.steps", 0) == 12);
  }
  SUBCASE("schema violations fail with line numbers") {
    CHECK_THROWS_AS(RunConfig::parse("unknown.key = 1\n", schema), config_error);
    try {
      RunConfig::parse("sim.p = 1\nwat.key = 2\n", schema);
      CHECK(false);
    } catch (const config_error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(RunConfig::parse("sim.p = 1\nsim.p = 2\n", schema), config_error);
    CHECK_THROWS_AS(RunConfig::parse("sim.p =\n", schema), config_error);
    CHECK_THROWS_AS(RunConfig::parse("sim p = 1\n", schema), config_error);
    CHECK_THROWS_AS(RunConfig::parse("just some text\n", schema), config_error);
    CHECK_THROWS_AS(RunConfig::parse("flag.on = maybe\n", schema).get_bool("flag.on", false),
                    config_error);
    CHECK_THROWS_AS(RunConfig::parse("sim.p = 4.5\n", schema).get_int("sim.p", 0),
                    config_error);
    CHECK_THROWS_AS(RunConfig::parse("sim.p = 1\n", schema).require_string("sim.steps"),
                    config_error);
    CHECK_THROWS_AS(RunConfig::parse("truth.list = 1,x\n", schema).get_int_list("truth.list"),
                    config_error);
  }
}

TEST_CASE("holdout evaluation") {
  SUBCASE("split boundaries are fixed at 80/20 by row") {
    VarModel m = oracle::random_model(3, 1, 0.7, 808, false);
    Trajectory traj = simulate(m, 99, 100, 809);
    SeriesFile series;
    series.values = traj.samples;  // 100 rows -> N = 99, train 79, test 20
    RealEvalResult res = evaluate_real(series, 1, PenaltySpec::l1(3), 4, 10, 1e-2);
    CHECK(res.n_train == 79);
    CHECK(res.n_test == 20);
    CHECK(res.b_hat.rows() == 3);
    CHECK(res.test_mse > 0.0);
    CHECK(res.best_lambda > 0.0);
  }
  SUBCASE("white-noise series select heavy sparsity") {
    int sparse_enough = 0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      VarModel white;
      white.coeffs = {Eigen::MatrixXd::Zero(10, 10)};
      white.sigma = Eigen::MatrixXd::Identity(10, 10);
      SeriesFile series;
      series.values = simulate(white, 259, 50, mix_seed(42, trial)).samples;
      RealEvalResult res = evaluate_real(series, 1, PenaltySpec::l1(10), 5, 20, 1e-3);
      if (res.sparsity <= 5.0) ++sparse_enough;
    }
    CHECK(sparse_enough >= 16);
  }
  SUBCASE("sparse truth favors the sparse penalty over the ridge reference") {
    VarModel truth = make_ground_truth(PenaltyKind::L1, 10, 1, TruthStructure{3, 0, 0},
                                       0.9, 911);
    SeriesFile series;
    series.values = simulate(truth, 899, 300, 912).samples;
    RealEvalResult lasso = evaluate_real(series, 1, PenaltySpec::l1(10), 5, 15, 1e-3);
    RealEvalResult ridge = evaluate_real(series, 1, PenaltySpec::ridge_sq(10), 5, 15, 1e-3);
    CHECK(lasso.test_mse <= ridge.test_mse);
    CHECK(lasso.sparsity < ridge.sparsity);
    CHECK(lasso.n_train == ridge.n_train);
  }
  SUBCASE("short series are rejected") {
    SeriesFile series;
    series.values = Eigen::MatrixXd::Zero(4, 2);
    CHECK_THROWS_AS(evaluate_real(series, 3, PenaltySpec::l1(6), 2), data_error);
  }
}

TEST_CASE("svg emission") {
  SvgCurve curve;
  curve.label = "p=10";
  curve.x = {1.0, 2.0};
  curve.y = {1.0, 0.5};
  SUBCASE("one polyline per curve") {
    const std::string path = (scratch_dir() / "one.svg").string();
    emit_svg(path, {curve});
    const std::string text = read_file(path);
    CHECK(count_occurrences(text, "<polyline") == 1);
    CHECK(text.find("p=10") != std::string::npos);
    CHECK(text.find("</svg>") != std::string::npos);

    SvgCurve second = curve;
    second.label = "p=20";
    const std::string two = (scratch_dir() / "two.svg").string();
    emit_svg(two, {curve, second});
    CHECK(count_occurrences(read_file(two), "<polyline") == 2);
  }
  SUBCASE("byte deterministic") {
    SvgOptions opts;
    opts.log_x = true;
    opts.log_y = true;
    opts.title = "errors";
    const std::string a = (scratch_dir() / "det_a.svg").string();
    const std::string b = (scratch_dir() / "det_b.svg").string();
    emit_svg(a, {curve}, opts);
    emit_svg(b, {curve}, opts);
    CHECK(read_file(a) == read_file(b));
  }
  SUBCASE("bad inputs are rejected before any file appears") {
    const fs::path path = scratch_dir() / "never.svg";
    fs::remove(path);
    CHECK_THROWS_AS(emit_svg(path.string(), {}), data_error);
    CHECK(!fs::exists(path));
    SvgCurve bad = curve;
    bad.y.pop_back();
    CHECK_THROWS_AS(emit_svg(path.string(), {bad}), data_error);
    CHECK(!fs::exists(path));
    SvgCurve negative = curve;
    negative.y = {1.0, -0.5};
    SvgOptions logged;
    logged.log_y = true;
    CHECK_THROWS_AS(emit_svg(path.string(), {negative}, logged), data_error);
    CHECK(!fs::exists(path));
  }
}
