#include "regvar/series_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "regvar/errors.hpp"

namespace regvar {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_field(const std::string& field, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    while (used < field.size() && (field[used] == ' ' || field[used] == '\t')) ++used;
    if (used != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw data_error("line " + std::to_string(line_no) + ": cannot parse number '" +
                     field + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out) throw data_error("cannot open '" + path + "' for writing");
  return out;
}

// Shared strict table reader: header row plus rectangular numeric rows.
void parse_table(const std::string& path, std::vector<std::string>& names,
                 std::vector<std::vector<double>>& rows) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      for (const std::string& name : split_fields(line)) {
        if (name.empty())
          throw data_error("line 1: empty column name in header");
        names.push_back(name);
      }
      continue;
    }
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != names.size())
      throw data_error("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(names.size()) + " fields, got " +
                       std::to_string(fields.size()));
    std::vector<double> vals;
    vals.reserve(fields.size());
    for (const std::string& f : fields) vals.push_back(parse_field(f, line_no));
    rows.push_back(std::move(vals));
  }
  if (names.empty()) throw data_error("'" + path + "' is empty (missing header)");
}

}  // namespace

SeriesFile load_csv(const std::string& path, bool standardize) {
  SeriesFile out;
  std::vector<std::vector<double>> rows;
  parse_table(path, out.names, rows);
  // a series needs at least two time points; a single row cannot be a series
  if (rows.size() < 2)
    throw data_error("'" + path + "' needs at least 2 data rows, found " +
                     std::to_string(rows.size()));

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(out.names.size());
  out.values.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      out.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

  out.means = out.values.colwise().mean();
  out.stds.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double centered_sq = (out.values.col(j).array() - out.means[j]).square().sum();
    out.stds[j] = n > 1 ? std::sqrt(centered_sq / static_cast<double>(n - 1)) : 0.0;
  }
  if (standardize) {
    for (Eigen::Index j = 0; j < p; ++j)
      out.values.col(j) =
          (out.values.col(j).array() - out.means[j]) / std::max(out.stds[j], 1e-12);
    out.standardized = true;
  }
  return out;
}

void save_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  out << "t";
  for (Eigen::Index j = 0; j < traj.samples.cols(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < traj.samples.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < traj.samples.cols(); ++j)
      out << "," << fmt17(traj.samples(i, j));
    out << "\n";
  }
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                     const std::string& col_prefix) {
  std::ofstream out = open_out(path);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    out << (j ? "," : "") << col_prefix << (j + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt17(m(i, j));
    out << "\n";
  }
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  parse_table(path, names, rows);  // unlike a series, one row is a valid matrix
  if (rows.empty()) throw data_error("'" + path + "' has no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(names.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void save_fit_diagnostics_csv(const std::string& path,
                              const std::vector<RowDiagnostics>& rows) {
  std::ofstream out = open_out(path);
  out << "row,iters,objective,residual,converged\n";
  for (std::size_t r = 0; r < rows.size(); ++r)
    out << (r + 1) << "," << rows[r].iterations << "," << fmt17(rows[r].objective) << ","
        << fmt17(rows[r].residual) << "," << (rows[r].converged ? 1 : 0) << "\n";
}

void save_scaling_records_csv(const std::string& path,
                              const std::vector<ScalingRecord>& records) {
  std::ofstream out = open_out(path);
  out << "kind,p,d,N,s,s_g,K,m,lambda,lambda_rel,err_mean,err_std,is_best\n";
  for (const ScalingRecord& r : records)
    out << penalty_kind_name(r.kind) << "," << r.p << "," << r.d << "," << r.n << ","
        << r.stats.s << "," << r.stats.s_g << "," << r.stats.k_groups << "," << r.stats.m
        << "," << fmt17(r.lambda) << "," << fmt17(r.lambda_rel) << ","
        << fmt17(r.err_mean) << "," << fmt17(r.err_std) << "," << (r.is_best ? 1 : 0)
        << "\n";
}

void save_alignment_csv(const std::string& path, const std::vector<ExpCurve>& curves) {
  std::ofstream out = open_out(path);
  out << "rescaled_x,curve_p,err\n";
  for (const ExpCurve& c : curves)
    for (std::size_t i = 0; i < c.x.size(); ++i)
      out << fmt17(c.x[i]) << "," << c.p << "," << fmt17(c.y[i]) << "\n";
}

RealEvalResult evaluate_real(const SeriesFile& series, int d, const PenaltySpec& spec,
                             int folds, int grid_size, double grid_ratio,
                             const FitConfig& base) {
  if (series.values.rows() < d + 2) throw data_error("series too short for the lag order");
  Trajectory traj;
  traj.samples = series.values;
  const RegressionData all = build_regression(traj, d);
  const Eigen::Index n = all.n();
  const Eigen::Index n_train = (n * 8) / 10;
  const Eigen::Index n_test = n - n_train;
  if (n_train < folds) throw data_error("training split smaller than the fold count");
  if (n_test < 1) throw data_error("empty holdout split");

  RegressionData train;
  train.x = all.x.topRows(n_train);
  train.y = all.y.topRows(n_train);
  RegressionData test;
  test.x = all.x.bottomRows(n_test);
  test.y = all.y.bottomRows(n_test);

  double grid_top = 0.0;
  if (spec.is_norm()) {
    grid_top = lambda_max(train, spec);
  } else {
    // No exact-zero threshold exists; use the gradient scale at zero.
    const double nt = static_cast<double>(train.n());
    for (Eigen::Index j = 0; j < train.y.cols(); ++j)
      grid_top =
          std::max(grid_top, ((2.0 / nt) * (train.x.transpose() * train.y.col(j))).norm());
  }
  if (!(grid_top > 0.0)) throw numeric_error("degenerate data: zero gradient at origin");

  const std::vector<double> grid = lambda_grid(grid_top, grid_size, grid_ratio);
  const CvResult cv = cross_validate(train, spec, grid, folds, base);

  FitConfig cfg = base;
  cfg.lambda = cv.best_lambda;
  const FitResult refit = fit(train, spec, cfg);

  RealEvalResult out;
  out.best_lambda = cv.best_lambda;
  out.b_hat = refit.b_hat;
  out.test_mse = prediction_mse(test, refit.b_hat);
  out.sparsity = nonzero_percent(refit.b_hat);
  out.n_train = n_train;
  out.n_test = n_test;
  return out;
}

}  // namespace regvar
