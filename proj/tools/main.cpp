#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "regvar/analysis.hpp"
#include "regvar/config.hpp"
#include "regvar/errors.hpp"
#include "regvar/experiments.hpp"
#include "regvar/model.hpp"
#include "regvar/penalties.hpp"
#include "regvar/rng.hpp"
#include "regvar/series_io.hpp"
#include "regvar/solver.hpp"
#include "regvar/spectral.hpp"
#include "regvar/svg.hpp"

namespace fs = std::filesystem;
using namespace regvar;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 1;
};

RunConfig load_config(const GlobalOpts& g, const std::set<std::string>& schema) {
  if (g.config_path.empty()) return RunConfig::parse("", schema);
  return RunConfig::load(g.config_path, schema);
}

fs::path ensure_out_dir(const GlobalOpts& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw data_error("cannot create output directory '" + g.out_dir + "'");
  return dir;
}

// model.coeffs_csv holds the p x (p*d) row layout [A_1 A_2 ... A_d];
// model.sigma_csv (optional) holds the p x p noise covariance.
VarModel model_from_config(const RunConfig& cfg) {
  const Eigen::MatrixXd rows = load_matrix_csv(cfg.require_string("model.coeffs_csv"));
  const Eigen::Index p = rows.rows();
  if (p < 1 || rows.cols() < p || rows.cols() % p != 0)
    throw data_error("coefficient matrix must be p x (p*d), got " +
                     std::to_string(rows.rows()) + " x " + std::to_string(rows.cols()));
  const int d = static_cast<int>(rows.cols() / p);
  VarModel m;
  for (int k = 0; k < d; ++k) m.coeffs.push_back(rows.middleCols(k * p, p));
  m.sigma = cfg.has("model.sigma_csv")
                ? Eigen::MatrixXd(load_matrix_csv(cfg.require_string("model.sigma_csv")))
                : Eigen::MatrixXd(Eigen::MatrixXd::Identity(p, p));
  m.validate();
  return m;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const std::string& part : split_on(text, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw config_error(what + ": cannot parse integer '" + part + "'");
    }
  }
  return out;
}

double parse_num(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw config_error(what + ": cannot parse number '" + text + "'");
  }
}

// Shorthand grammar (see --help): l1 | ridge | gl:<sizes> | sgl:<alpha>:<sizes>
// | owl:<w1,w2,...> | owl:linear:<hi>:<lo>
PenaltySpec penalty_from_shorthand(const std::string& text, int dp) {
  const std::vector<std::string> parts = split_on(text, ':');
  const std::string& kind = parts[0];
  if (kind == "l1" && parts.size() == 1) return PenaltySpec::l1(dp);
  if (kind == "ridge" && parts.size() == 1) return PenaltySpec::ridge_sq(dp);
  if (kind == "gl" && parts.size() == 2)
    return PenaltySpec::group_lasso_blocks(dp, parse_int_list(parts[1], "--penalty gl"));
  if (kind == "sgl" && parts.size() == 3)
    return PenaltySpec::sparse_group_lasso_blocks(
        dp, parse_num(parts[1], "--penalty sgl alpha"),
        parse_int_list(parts[2], "--penalty sgl"));
  if (kind == "owl" && parts.size() == 4 && parts[1] == "linear")
    return PenaltySpec::owl_linear(dp, parse_num(parts[2], "--penalty owl hi"),
                                   parse_num(parts[3], "--penalty owl lo"));
  if (kind == "owl" && parts.size() == 2) {
    const std::vector<std::string> raw = split_on(parts[1], ',');
    Eigen::VectorXd w(static_cast<Eigen::Index>(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i)
      w[static_cast<Eigen::Index>(i)] = parse_num(raw[i], "--penalty owl weight");
    return PenaltySpec::owl(w);
  }
  throw config_error("cannot parse penalty spec '" + text + "'");
}

PenaltySpec penalty_from_config(const RunConfig& cfg, int dp) {
  const std::string kind = cfg.require_string("penalty.kind");
  if (kind == "l1") return PenaltySpec::l1(dp);
  if (kind == "ridge") return PenaltySpec::ridge_sq(dp);
  if (kind == "gl")
    return PenaltySpec::group_lasso_blocks(dp, cfg.get_int_list("penalty.groups"));
  if (kind == "sgl")
    return PenaltySpec::sparse_group_lasso_blocks(dp, cfg.get_double("penalty.alpha", 0.5),
                                                  cfg.get_int_list("penalty.groups"));
  if (kind == "owl") {
    const std::string raw = cfg.require_string("penalty.owl_weights");
    if (raw.rfind("linear:", 0) == 0) {
      const std::vector<std::string> parts = split_on(raw, ':');
      if (parts.size() != 3) throw config_error("penalty.owl_weights: expected linear:<hi>:<lo>");
      return PenaltySpec::owl_linear(dp, parse_num(parts[1], "penalty.owl_weights hi"),
                                     parse_num(parts[2], "penalty.owl_weights lo"));
    }
    const std::vector<double> vals = cfg.get_double_list("penalty.owl_weights");
    Eigen::VectorXd w(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) w[static_cast<Eigen::Index>(i)] = vals[i];
    return PenaltySpec::owl(w);
  }
  throw config_error("penalty.kind: unknown penalty '" + kind + "'");
}

PenaltySpec resolve_penalty(const std::string& flag_text, const RunConfig& cfg, int dp) {
  if (!flag_text.empty()) return penalty_from_shorthand(flag_text, dp);
  if (cfg.has("penalty.kind")) return penalty_from_config(cfg, dp);
  throw config_error("no penalty given: pass --penalty or set penalty.kind in the config");
}

PenaltyKind kind_from_name(const std::string& name) {
  if (name == "l1") return PenaltyKind::L1;
  if (name == "gl") return PenaltyKind::GroupLasso;
  if (name == "sgl") return PenaltyKind::SparseGroupLasso;
  if (name == "owl") return PenaltyKind::Owl;
  if (name == "ridge") return PenaltyKind::RidgeSq;
  throw config_error("unknown penalty kind '" + name + "'");
}

const std::set<std::string> kPenaltyKeys = {"penalty.kind", "penalty.alpha",
                                            "penalty.groups", "penalty.owl_weights"};
const std::set<std::string> kModelKeys = {"model.coeffs_csv", "model.sigma_csv"};
const std::set<std::string> kDataKeys = {"data.csv", "data.standardize", "data.d",
                                         "data.keep_t"};
const std::set<std::string> kSolverKeys = {"solver.lambda",    "solver.lambda_rel",
                                           "solver.tol",       "solver.max_iters",
                                           "solver.grid_size", "solver.grid_ratio"};

std::set<std::string> merge_keys(std::initializer_list<std::set<std::string>> sets) {
  std::set<std::string> out;
  for (const auto& s : sets) out.insert(s.begin(), s.end());
  return out;
}

const std::set<std::string> kSimKeys = {"sim.steps", "sim.burn_in"};
const std::set<std::string> kSpectralKeys = {"spectral.grid"};
const std::set<std::string> kCvKeys = {"cv.folds"};
const std::set<std::string> kTheoryKeys = {"theory.samples", "theory.n",
                                           "theory.c",       "theory.r",
                                           "theory.trials",  "theory.kappa_n",
                                           "theory.lambda"};
const std::set<std::string> kScalingKeys = {
    "scaling.kind",      "scaling.p_list",     "scaling.n_list",  "scaling.runs",
    "scaling.s",         "scaling.k_groups",   "scaling.s_g",     "scaling.alpha",
    "scaling.owl_hi",    "scaling.owl_lo",     "scaling.d",       "scaling.grid_size",
    "scaling.grid_ratio", "scaling.radius",    "scaling.burn_in", "scaling.tol",
    "scaling.max_iters"};

// One config file can serve several subcommands, so every command validates
// against the union of known keys and reads only the ones it uses; misspelled
// keys still fail fast.
const std::set<std::string> kAllKeys =
    merge_keys({kModelKeys, kDataKeys, kPenaltyKeys, kSolverKeys, kSimKeys,
                kSpectralKeys, kCvKeys, kTheoryKeys, kScalingKeys});

FitConfig solver_from_config(const RunConfig& cfg, const GlobalOpts& g) {
  FitConfig fc;
  fc.tol = cfg.get_double("solver.tol", fc.tol);
  fc.max_iters = cfg.get_int("solver.max_iters", fc.max_iters);
  fc.threads = g.threads;
  return fc;
}

struct LoadedData {
  SeriesFile series;
  RegressionData data;
  int d = 1;
};

LoadedData load_regression(const RunConfig& cfg, const std::string& data_flag, int order_flag,
                           bool standardize) {
  const std::string path =
      !data_flag.empty() ? data_flag : cfg.require_string("data.csv");
  LoadedData out;
  out.d = order_flag > 0 ? order_flag : cfg.get_int("data.d", 1);
  if (out.d < 1) throw config_error("lag order must be positive");
  out.series = load_csv(path, standardize);
  // a leading column named "t" is the time index simulate writes, not a
  // variable; drop it unless data.keep_t says otherwise
  if (!cfg.get_bool("data.keep_t", false) && !out.series.names.empty() &&
      out.series.names.front() == "t" && out.series.values.cols() > 1) {
    out.series.names.erase(out.series.names.begin());
    const Eigen::Index p = out.series.values.cols() - 1;
    out.series.values = out.series.values.rightCols(p).eval();
    if (out.series.means.size() > 0) {
      out.series.means = out.series.means.tail(p).eval();
      out.series.stds = out.series.stds.tail(p).eval();
    }
  }
  Trajectory traj;
  traj.samples = out.series.values;
  out.data = build_regression(traj, out.d);
  return out;
}

// The largest useful grid value: the exact zero-solution threshold for norms,
// the gradient scale at zero for the squared-ridge reference.
double grid_top_for(const RegressionData& data, const PenaltySpec& spec) {
  if (spec.is_norm()) return lambda_max(data, spec);
  double top = 0.0;
  const double n = static_cast<double>(data.n());
  for (Eigen::Index j = 0; j < data.y.cols(); ++j)
    top = std::max(top, ((2.0 / n) * (data.x.transpose() * data.y.col(j))).norm());
  return top;
}

void write_fit_outputs(const GlobalOpts& g, const FitResult& res) {
  const fs::path dir = ensure_out_dir(g);
  save_matrix_csv((dir / "b_hat.csv").string(), res.b_hat, "b");
  save_fit_diagnostics_csv((dir / "diagnostics.csv").string(), res.per_row);
  std::cout << "wrote " << (dir / "b_hat.csv").string() << "\n";
  std::cout << "wrote " << (dir / "diagnostics.csv").string() << "\n";
}

int cmd_simulate(const GlobalOpts& g) {
  const RunConfig cfg = load_config(g, kAllKeys);
  const VarModel model = model_from_config(cfg);
  const int steps = cfg.get_int("sim.steps", 0);
  if (steps < 1) throw config_error("sim.steps must be a positive integer");
  const Trajectory traj =
      simulate(model, steps, cfg.get_int("sim.burn_in", 500), g.seed);
  const fs::path out = ensure_out_dir(g) / "trajectory.csv";
  save_trajectory_csv(out.string(), traj);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_spectral(const GlobalOpts& g) {
  const RunConfig cfg = load_config(g, kAllKeys);
  const VarModel model = model_from_config(cfg);
  const SpectralBounds bounds = spectral_bounds(model, cfg.get_int("spectral.grid", 512));
  const AutocovarianceSet acov = autocov_lyapunov(model, model.lag_order());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acov.c_x, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numeric_error("eigenvalue computation failed on lag-window covariance");

  std::cout << "radius = " << fmt(is_stable(model).spectral_radius) << "\n"
            << "lambda_max_A = " << fmt(bounds.lam_max_curve_a) << "\n"
            << "lambda_min_boldA = " << fmt(bounds.lam_min_curve_bold) << "\n"
            << "script_L = " << fmt(bounds.script_l) << "\n"
            << "script_M = " << fmt(bounds.script_m) << "\n"
            << "min_eig_Cx = " << fmt(es.eigenvalues().minCoeff()) << "\n";
  return 0;
}

int run_cv(const GlobalOpts& g, const RunConfig& cfg, const LoadedData& loaded,
           const PenaltySpec& spec, int folds_flag, int grid_size_flag,
           double grid_ratio_flag) {
  const int folds = folds_flag > 0 ? folds_flag : cfg.get_int("cv.folds", 5);
  const int grid_size =
      grid_size_flag > 0 ? grid_size_flag : cfg.get_int("solver.grid_size", 30);
  const double grid_ratio =
      grid_ratio_flag > 0 ? grid_ratio_flag : cfg.get_double("solver.grid_ratio", 1e-3);
  FitConfig fc = solver_from_config(cfg, g);

  const double top = grid_top_for(loaded.data, spec);
  if (!(top > 0.0)) throw numeric_error("degenerate data: zero gradient at origin");
  const std::vector<double> grid = lambda_grid(top, grid_size, grid_ratio);
  const CvResult cv = cross_validate(loaded.data, spec, grid, folds, fc);

  fc.lambda = cv.best_lambda;
  const FitResult res = fit(loaded.data, spec, fc);

  const fs::path dir = ensure_out_dir(g);
  {
    std::ofstream out((dir / "cv_curve.csv").string(), std::ios::binary);
    if (!out) throw data_error("cannot open 'cv_curve.csv' for writing");
    out << "lambda,cv_mse\n";
    for (std::size_t i = 0; i < cv.grid.size(); ++i)
      out << fmt(cv.grid[i]) << "," << fmt(cv.cv_mse[i]) << "\n";
  }
  std::cout << "wrote " << (dir / "cv_curve.csv").string() << "\n";
  write_fit_outputs(g, res);
  std::cout << "best_lambda = " << fmt(cv.best_lambda) << "\n"
            << "best_lambda_rel = " << fmt(cv.best_lambda / grid.front()) << "\n"
            << "cv_mse = " << fmt(cv.cv_mse[cv.best_index]) << "\n"
            << "nonzero_percent = " << fmt(nonzero_percent(res.b_hat)) << "\n"
            << "train_mse = " << fmt(prediction_mse(loaded.data, res.b_hat)) << "\n";
  return 0;
}

int cmd_fit(const GlobalOpts& g, const std::string& data_flag, int order_flag,
            const std::string& penalty_flag, double lambda_flag, double lambda_rel_flag,
            bool cv_mode, int folds_flag, int grid_size_flag, double grid_ratio_flag,
            bool standardize) {
  const RunConfig cfg = load_config(g, kAllKeys);
  const LoadedData loaded = load_regression(
      cfg, data_flag, order_flag, standardize || cfg.get_bool("data.standardize", false));
  const int dp = static_cast<int>(loaded.data.x.cols());
  const PenaltySpec spec = resolve_penalty(penalty_flag, cfg, dp);

  if (cv_mode)
    return run_cv(g, cfg, loaded, spec, folds_flag, grid_size_flag, grid_ratio_flag);

  FitConfig fc = solver_from_config(cfg, g);
  double lambda_rel = lambda_rel_flag >= 0 ? lambda_rel_flag
                                           : cfg.get_double("solver.lambda_rel", -1.0);
  if (lambda_flag >= 0) {
    fc.lambda = lambda_flag;
  } else if (lambda_rel >= 0) {
    fc.lambda = lambda_rel * grid_top_for(loaded.data, spec);
  } else if (cfg.has("solver.lambda")) {
    fc.lambda = cfg.get_double("solver.lambda", 0.0);
  } else {
    throw config_error("specify --lambda, --lambda-rel, or --cv");
  }

  const FitResult res = fit(loaded.data, spec, fc);
  write_fit_outputs(g, res);
  const double top = grid_top_for(loaded.data, spec);
  std::cout << "lambda = " << fmt(fc.lambda) << "\n"
            << "lambda_rel = " << fmt(top > 0.0 ? fc.lambda / top : 0.0) << "\n"
            << "nonzero_percent = " << fmt(nonzero_percent(res.b_hat)) << "\n"
            << "train_mse = " << fmt(prediction_mse(loaded.data, res.b_hat)) << "\n";
  return 0;
}

int cmd_theory(const GlobalOpts& g, const std::string& penalty_flag) {
  const RunConfig cfg = load_config(g, kAllKeys);
  const VarModel model = model_from_config(cfg);
  const int p = model.dim(), d = model.lag_order(), dp = p * d;
  const PenaltySpec spec = resolve_penalty(penalty_flag, cfg, dp);

  const WidthEstimate width =
      gaussian_width_mc(spec, dp, cfg.get_int("theory.samples", 10000), g.seed, g.threads);
  const StructureStats stats = structure_stats(spec, coefficient_rows(model));
  const double n = cfg.get_double("theory.n", 100.0);
  const double rate = rate_prediction(spec, stats, p, d, n);

  const SpectralBounds bounds = spectral_bounds(model);
  // cone-width surrogate: the rate numerator, i.e. the prediction at n = 1
  const double w_theta = rate_prediction(spec, stats, p, d, 1.0);
  const long long n_min = sample_bound(bounds, w_theta, cfg.get_double("theory.c", 1.0));

  const double r_const = cfg.get_double("theory.r", 2.0);
  const int kappa_n = cfg.get_int("theory.kappa_n", 50 * dp);
  const Trajectory traj =
      simulate(model, static_cast<Eigen::Index>(kappa_n) + d - 1, 500, mix_seed(g.seed, 7));
  const RegressionData data = build_regression(traj, d);
  const double kappa_hat =
      empirical_re_constant(data, spec, stack_coefficients(model),
                            cfg.get_int("theory.trials", 200), r_const, mix_seed(g.seed, 8));

  const double lambda_for_bound = cfg.get_double("theory.lambda", rate);
  const double det_bound = det_error_bound(lambda_for_bound, kappa_hat, r_const,
                                           compat_constant(spec, stats));

  std::cout << "width_mean = " << fmt(width.mean) << "\n"
            << "width_stderr = " << fmt(width.std_err) << "\n"
            << "rate = " << fmt(rate) << "\n"
            << "n_min = " << n_min << "\n"
            << "kappa_hat = " << fmt(kappa_hat) << "\n"
            << "det_bound = " << fmt(det_bound) << "\n"
            << "# first-term rate valid in the regime n >= width^(2/3): here n = "
            << fmt(n) << ", width^(2/3) = " << fmt(std::pow(width.mean, 2.0 / 3.0)) << "\n";
  return 0;
}

int cmd_scaling(const GlobalOpts& g, const std::string& svg_prefix) {
  const RunConfig cfg = load_config(g, kAllKeys);
  ScalingConfig sc;
  sc.kind = kind_from_name(cfg.require_string("scaling.kind"));
  sc.truth.s = cfg.get_int("scaling.s", 4);
  sc.truth.k_groups = cfg.get_int("scaling.k_groups", 0);
  sc.truth.s_g = cfg.get_int("scaling.s_g", 0);
  sc.alpha = cfg.get_double("scaling.alpha", 0.5);
  sc.owl_hi = cfg.get_double("scaling.owl_hi", 2.0);
  sc.owl_lo = cfg.get_double("scaling.owl_lo", 1.0);
  sc.p_list = cfg.get_int_list("scaling.p_list");
  sc.n_list = cfg.get_int_list("scaling.n_list");
  sc.d = cfg.get_int("scaling.d", 1);
  sc.runs = cfg.get_int("scaling.runs", 50);
  sc.lambda_grid_size = cfg.get_int("scaling.grid_size", 30);
  sc.lambda_ratio = cfg.get_double("scaling.grid_ratio", 1e-3);
  sc.target_radius = cfg.get_double("scaling.radius", 0.9);
  sc.burn_in = cfg.get_int("scaling.burn_in", 500);
  sc.master_seed = g.seed;
  sc.threads = g.threads;
  sc.solver.tol = cfg.get_double("scaling.tol", 1e-7);
  sc.solver.max_iters = cfg.get_int("scaling.max_iters", 10000);

  const ScalingResult res = run_scaling(sc);
  const fs::path dir = ensure_out_dir(g);
  save_scaling_records_csv((dir / "records.csv").string(), res.records);
  std::cout << "wrote " << (dir / "records.csv").string() << "\n";

  const std::vector<ExpCurve> curves = rescale_axis(res.records, sc.alpha);
  save_alignment_csv((dir / "alignment.csv").string(), curves);
  std::cout << "wrote " << (dir / "alignment.csv").string() << "\n";

  std::cout << "records = " << res.records.size() << "\n"
            << "failures = " << res.failures.size() << "\n"
            << "converged_fits = " << res.converged_fits << "/" << res.total_fits << "\n"
            << "all_monotone = " << (res.all_monotone ? 1 : 0) << "\n"
            << "worst_residual_ratio = " << fmt(res.worst_residual_ratio) << "\n";
  for (const CellFailure& f : res.failures)
    std::cerr << "cell failure p=" << f.p << " N=" << f.n << " run=" << f.run << ": "
              << f.message << "\n";

  if (curves.size() >= 2) {
    const AlignmentReport rep = alignment_metric(curves);
    std::cout << "max_pairwise_dev = " << fmt(rep.max_pairwise_dev) << "\n";
    for (const auto& [p, slope] : rep.loglog_slope_per_p)
      std::cout << "slope_p" << p << " = " << fmt(slope) << "\n";
  }

  std::set<int> distinct_p, distinct_n;
  for (const ScalingRecord& rec : res.records)
    if (rec.is_best) {
      distinct_p.insert(rec.p);
      distinct_n.insert(rec.n);
    }
  if (distinct_p.size() >= 3 && distinct_n.size() >= 3) {
    const LambdaTrend trend = lambda_trend(res.records);
    for (const auto& [p, slope] : trend.logn_slope_per_p)
      std::cout << "lambda_slope_p" << p << " = " << fmt(slope) << "\n";
    std::cout << "lambda_corr = " << fmt(trend.corr_sqrt_log_p) << "\n"
              << "lambda_fixed_n = " << trend.fixed_n << "\n";
  }

  if (!svg_prefix.empty()) {
    std::vector<SvgCurve> raw;
    std::map<int, SvgCurve> raw_by_p;
    for (const ScalingRecord& rec : res.records)
      if (rec.is_best) {
        SvgCurve& c = raw_by_p[rec.p];
        c.label = "p=" + std::to_string(rec.p);
        c.x.push_back(rec.n);
        c.y.push_back(rec.err_mean);
      }
    for (auto& [p, c] : raw_by_p) raw.push_back(c);
    SvgOptions opts;
    opts.log_x = true;
    opts.log_y = true;
    opts.x_label = "N";
    opts.y_label = "estimation error";
    opts.title = "error vs sample size";
    emit_svg(svg_prefix + ".raw.svg", raw, opts);
    std::vector<SvgCurve> rescaled;
    for (const ExpCurve& c : curves) {
      SvgCurve s;
      s.label = "p=" + std::to_string(c.p);
      s.x = c.x;
      s.y = c.y;
      rescaled.push_back(std::move(s));
    }
    opts.x_label = "rescaled N";
    opts.title = "error vs rescaled sample size";
    emit_svg(svg_prefix + ".rescaled.svg", rescaled, opts);
    std::cout << "wrote " << svg_prefix << ".raw.svg\n"
              << "wrote " << svg_prefix << ".rescaled.svg\n";
  }
  return 0;
}

int cmd_eval_real(const GlobalOpts& g, const std::string& data_flag, int order_flag,
                  const std::string& penalty_flag, int folds_flag, int grid_size_flag,
                  double grid_ratio_flag, bool raw_values) {
  const RunConfig cfg = load_config(g, kAllKeys);
  // standardization is on by default for real data; --raw turns it off
  const bool standardize = raw_values ? false : cfg.get_bool("data.standardize", true);
  const LoadedData loaded = load_regression(cfg, data_flag, order_flag, standardize);
  const int dp = static_cast<int>(loaded.data.x.cols());
  const PenaltySpec spec = resolve_penalty(penalty_flag, cfg, dp);

  const int folds = folds_flag > 0 ? folds_flag : cfg.get_int("cv.folds", 5);
  const int grid_size =
      grid_size_flag > 0 ? grid_size_flag : cfg.get_int("solver.grid_size", 30);
  const double grid_ratio =
      grid_ratio_flag > 0 ? grid_ratio_flag : cfg.get_double("solver.grid_ratio", 1e-3);
  const RealEvalResult res = evaluate_real(loaded.series, loaded.d, spec, folds, grid_size,
                                           grid_ratio, solver_from_config(cfg, g));

  const fs::path dir = ensure_out_dir(g);
  save_matrix_csv((dir / "b_hat.csv").string(), res.b_hat, "b");
  std::cout << "wrote " << (dir / "b_hat.csv").string() << "\n"
            << "best_lambda = " << fmt(res.best_lambda) << "\n"
            << "test_mse = " << fmt(res.test_mse) << "\n"
            << "sparsity_percent = " << fmt(res.sparsity) << "\n"
            << "n_train = " << res.n_train << "\n"
            << "n_test = " << res.n_test << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOpts g;
  CLI::App app{"norm-regularized estimation of stable vector autoregressions"};
  app.require_subcommand(1);
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--seed", g.seed, "random seed (default 1)");
  app.add_option("--threads", g.threads, "worker threads (default 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "output directory (created if missing)");

  const char* penalty_help =
      "penalty spec: l1 | ridge | gl:<sizes> | sgl:<alpha>:<sizes> | "
      "owl:<w1,w2,...> | owl:linear:<hi>:<lo> (sizes sum to p*d)";

  int rc = 0;

  CLI::App* sim = app.add_subcommand(
      "simulate", "simulate a trajectory from model.coeffs_csv; writes trajectory.csv "
                  "(header t,x1,...,xp)");
  sim->callback([&] { rc = cmd_simulate(g); });

  CLI::App* spec_cmd = app.add_subcommand(
      "spectral", "stability and conditioning report: radius, lambda_max_A, "
                  "lambda_min_boldA, script_L, script_M, min_eig_Cx");
  spec_cmd->callback([&] { rc = cmd_spectral(g); });

  struct FitArgs {
    std::string data, penalty;
    int order = 0, folds = 0, grid_size = 0;
    double lambda = -1.0, lambda_rel = -1.0, grid_ratio = 0.0;
    bool cv = false, standardize = false;
  } fit_args;
  CLI::App* fit_cmd = app.add_subcommand(
      "fit", "one penalized fit; writes b_hat.csv (dp rows x p cols) and diagnostics.csv "
             "(header row,iters,objective,residual,converged)");
  fit_cmd->add_option("--data", fit_args.data, "input series CSV (a leading column named t is dropped as the time index)");
  fit_cmd->add_option("--order", fit_args.order, "lag order d");
  fit_cmd->add_option("--penalty", fit_args.penalty, penalty_help);
  fit_cmd->add_option("--lambda", fit_args.lambda, "raw regularization weight");
  fit_cmd->add_option("--lambda-rel", fit_args.lambda_rel,
                      "regularization weight as a fraction of lambda_max");
  fit_cmd->add_flag("--cv", fit_args.cv, "select lambda by cross-validation instead");
  fit_cmd->add_option("--folds", fit_args.folds, "cross-validation folds (with --cv)");
  fit_cmd->add_flag("--standardize", fit_args.standardize, "standardize columns first");
  fit_cmd->callback([&] {
    rc = cmd_fit(g, fit_args.data, fit_args.order, fit_args.penalty, fit_args.lambda,
                 fit_args.lambda_rel, fit_args.cv, fit_args.folds, fit_args.grid_size,
                 fit_args.grid_ratio, fit_args.standardize);
  });

  FitArgs cv_args;
  CLI::App* cv_cmd = app.add_subcommand(
      "cv", "cross-validated fit; writes cv_curve.csv (header lambda,cv_mse) plus the fit "
            "outputs at the selected lambda");
  cv_cmd->add_option("--data", cv_args.data, "input series CSV (a leading column named t is dropped as the time index)");
  cv_cmd->add_option("--order", cv_args.order, "lag order d");
  cv_cmd->add_option("--penalty", cv_args.penalty, penalty_help);
  cv_cmd->add_option("--folds", cv_args.folds, "contiguous time folds (default 5)");
  cv_cmd->add_option("--grid-size", cv_args.grid_size, "lambda grid size (default 30)");
  cv_cmd->add_option("--grid-ratio", cv_args.grid_ratio,
                     "smallest/largest grid ratio (default 1e-3)");
  cv_cmd->add_flag("--standardize", cv_args.standardize, "standardize columns first");
  cv_cmd->callback([&] {
    rc = cmd_fit(g, cv_args.data, cv_args.order, cv_args.penalty, -1.0, -1.0, true,
                 cv_args.folds, cv_args.grid_size, cv_args.grid_ratio,
                 cv_args.standardize);
  });

  std::string theory_penalty;
  CLI::App* theory_cmd = app.add_subcommand(
      "theory", "theory-side report: width_mean, width_stderr, rate, n_min, kappa_hat, "
                "det_bound");
  theory_cmd->add_option("--penalty", theory_penalty, penalty_help);
  theory_cmd->callback([&] { rc = cmd_theory(g, theory_penalty); });

  std::string svg_prefix;
  CLI::App* scaling_cmd = app.add_subcommand(
      "scaling", "(p, N, lambda) error sweep; writes records.csv (header kind,p,d,N,s,s_g,"
                 "K,m,lambda,lambda_rel,err_mean,err_std,is_best) and alignment.csv "
                 "(header rescaled_x,curve_p,err)");
  scaling_cmd->add_option("--svg", svg_prefix,
                          "emit <prefix>.raw.svg and <prefix>.rescaled.svg line plots");
  scaling_cmd->callback([&] { rc = cmd_scaling(g, svg_prefix); });

  FitArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval-real", "chronological 80/20 holdout evaluation; writes b_hat.csv and prints "
                   "best_lambda, test_mse, sparsity_percent, n_train, n_test");
  eval_cmd->add_option("--data", eval_args.data, "input series CSV (a leading column named t is dropped as the time index)");
  eval_cmd->add_option("--order", eval_args.order, "lag order d");
  eval_cmd->add_option("--penalty", eval_args.penalty, penalty_help);
  eval_cmd->add_option("--folds", eval_args.folds, "cross-validation folds (default 5)");
  eval_cmd->add_option("--grid-size", eval_args.grid_size, "lambda grid size (default 30)");
  eval_cmd->add_option("--grid-ratio", eval_args.grid_ratio,
                       "smallest/largest grid ratio (default 1e-3)");
  eval_cmd->add_flag("--raw", eval_args.standardize,
                     "skip the default column standardization");
  eval_cmd->callback([&] {
    rc = cmd_eval_real(g, eval_args.data, eval_args.order, eval_args.penalty,
                       eval_args.folds, eval_args.grid_size, eval_args.grid_ratio,
                       eval_args.standardize);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
