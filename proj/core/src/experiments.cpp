#include "regvar/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "regvar/errors.hpp"
#include "regvar/parallel.hpp"
#include "regvar/rng.hpp"

namespace regvar {

namespace {

std::vector<int> sample_distinct(GaussianRng& rng, int count, int upper) {
  std::vector<int> all(static_cast<std::size_t>(upper));
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates: the first `count` entries become the sample.
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.index(static_cast<std::uint64_t>(upper - i)));
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
  }
  all.resize(static_cast<std::size_t>(count));
  return all;
}

double signed_magnitude(GaussianRng& rng) {
  const double mag = rng.uniform(0.5, 1.0);
  return rng.uniform(0.0, 1.0) < 0.5 ? -mag : mag;
}

PenaltySpec scaling_penalty(const ScalingConfig& cfg, int dp) {
  switch (cfg.kind) {
    case PenaltyKind::L1:
      return PenaltySpec::l1(dp);
    case PenaltyKind::Owl:
      return PenaltySpec::owl_linear(dp, cfg.owl_hi, cfg.owl_lo);
    case PenaltyKind::GroupLasso:
    case PenaltyKind::SparseGroupLasso: {
      if (cfg.truth.k_groups < 1 || dp % cfg.truth.k_groups != 0)
        throw config_error("group count must divide dp for the scaling sweep");
      const std::vector<int> sizes(static_cast<std::size_t>(cfg.truth.k_groups),
                                   dp / cfg.truth.k_groups);
      return cfg.kind == PenaltyKind::GroupLasso
                 ? PenaltySpec::group_lasso_blocks(dp, sizes)
                 : PenaltySpec::sparse_group_lasso_blocks(dp, cfg.alpha, sizes);
    }
    case PenaltyKind::RidgeSq:
      throw config_error("scaling sweep needs a norm penalty");
  }
  throw config_error("unknown penalty kind");
}

}  // namespace

VarModel make_ground_truth(PenaltyKind kind, int p, int d, const TruthStructure& truth,
                           double target_radius, std::uint64_t seed) {
  if (p < 1 || d < 1) throw config_error("ground truth needs positive p and d");
  const int dp = p * d;
  GaussianRng rng(mix_seed(seed, 0x7a3f9d2cULL));

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(p, dp);
  switch (kind) {
    case PenaltyKind::L1:
    case PenaltyKind::Owl:
    case PenaltyKind::RidgeSq: {
      if (truth.s < 1 || truth.s > dp)
        throw config_error("row sparsity s must lie in [1, dp]");
      for (int r = 0; r < p; ++r)
        for (int idx : sample_distinct(rng, truth.s, dp))
          rows(r, idx) = signed_magnitude(rng);
      break;
    }
    case PenaltyKind::GroupLasso:
    case PenaltyKind::SparseGroupLasso: {
      if (truth.k_groups < 1 || dp % truth.k_groups != 0)
        throw config_error("group count must divide dp");
      if (truth.s_g < 1 || truth.s_g > truth.k_groups)
        throw config_error("active groups s_g must lie in [1, k_groups]");
      const int m = dp / truth.k_groups;
      for (int r = 0; r < p; ++r) {
        for (int g : sample_distinct(rng, truth.s_g, truth.k_groups)) {
          for (int i = 0; i < m; ++i) rows(r, g * m + i) = signed_magnitude(rng);
          if (kind == PenaltyKind::SparseGroupLasso && m > 1)
            for (int i : sample_distinct(rng, m / 2, m)) rows(r, g * m + i) = 0.0;
        }
      }
      break;
    }
  }

  VarModel model;
  model.coeffs.resize(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k)
    model.coeffs[static_cast<std::size_t>(k)] = rows.middleCols(k * p, p);
  model.sigma = Eigen::MatrixXd::Identity(p, p);

  RescaleResult scaled = rescale_to_radius(model.coeffs, target_radius);
  if (scaled.all_zero) throw numeric_error("planted ground truth is identically zero");
  model.coeffs = std::move(scaled.coeffs);
  return model;
}

namespace {

struct CellOutput {
  std::vector<double> errs;  // per grid index; empty on failure
  double lambda_max_value = 0.0;
  double truth_norm = 0.0;
  std::string error;
  bool all_monotone = true;
  long long fits = 0, converged = 0;
  double worst_residual_ratio = 0.0;
};

}  // namespace

ScalingResult run_scaling(const ScalingConfig& cfg) {
  if (cfg.p_list.empty() || cfg.n_list.empty())
    throw config_error("scaling sweep needs non-empty p and N lists");
  if (cfg.runs < 1) throw config_error("scaling sweep needs runs >= 1");
  if (cfg.lambda_grid_size < 2) throw config_error("scaling sweep needs a lambda grid");
  if (cfg.d < 1) throw config_error("lag order must be positive");
  for (int p : cfg.p_list)
    if (p < 1) throw config_error("dimensions must be positive");
  for (int n : cfg.n_list)
    if (n < 1) throw config_error("sample sizes must be positive");

  const std::size_t np = cfg.p_list.size(), nn = cfg.n_list.size(),
                    nr = static_cast<std::size_t>(cfg.runs);
  const std::size_t jobs = np * nn * nr;
  std::vector<CellOutput> cells(jobs);

  parallel_for(jobs, cfg.threads, [&](std::size_t idx) {
    const std::size_t pi = idx / (nn * nr);
    const std::size_t ni = (idx / nr) % nn;
    const int run = static_cast<int>(idx % nr);
    const int p = cfg.p_list[pi];
    const int n = cfg.n_list[ni];
    CellOutput& cell = cells[idx];
    try {
      const std::uint64_t cell_seed =
          mix_seed(cfg.master_seed, static_cast<std::uint64_t>(pi),
                   static_cast<std::uint64_t>(ni),
                   static_cast<std::uint64_t>(cfg.run_offset + run));
      VarModel truth = make_ground_truth(cfg.kind, p, cfg.d, cfg.truth,
                                         cfg.target_radius, mix_seed(cell_seed, 1));
      if (cfg.sigma.size()) {
        if (cfg.sigma.rows() != p || cfg.sigma.cols() != p)
          throw config_error("noise covariance must be p x p");
        truth.sigma = cfg.sigma;
      }
      const Eigen::Index T = static_cast<Eigen::Index>(n) + cfg.d - 1;
      Trajectory traj = simulate(truth, T, cfg.burn_in, mix_seed(cell_seed, 2));
      RegressionData data = build_regression(traj, cfg.d);

      const PenaltySpec spec = scaling_penalty(cfg, p * cfg.d);
      const double l_max = lambda_max(data, spec);
      if (!(l_max > 0.0)) throw numeric_error("degenerate data: lambda_max is zero");
      cell.lambda_max_value = l_max;

      // Errors are recorded on the per-row scale (root-mean-square over the p
      // row problems): the row problems are independent and share one rate, so
      // only the per-row error is comparable across dimensions. The full
      // stacked norm would carry a sqrt(p) factor that never aligns.
      const double row_scale = std::sqrt(static_cast<double>(p));
      const Eigen::MatrixXd b_true = stack_coefficients(truth);
      cell.truth_norm = b_true.norm() / row_scale;
      FitConfig fit_cfg = cfg.solver;
      fit_cfg.record_trace = true;
      fit_cfg.threads = 1;  // parallelism lives at the cell level
      Eigen::MatrixXd warm;
      cell.errs.reserve(static_cast<std::size_t>(cfg.lambda_grid_size));
      for (double lam : lambda_grid(l_max, cfg.lambda_grid_size, cfg.lambda_ratio)) {
        fit_cfg.lambda = lam;
        FitResult res = fit(data, spec, fit_cfg, warm.size() ? &warm : nullptr);
        warm = res.b_hat;
        cell.errs.push_back((res.b_hat - b_true).norm() / row_scale);
        for (std::size_t r = 0; r < res.per_row.size(); ++r) {
          const RowDiagnostics& dg = res.per_row[r];
          ++cell.fits;
          if (dg.converged) ++cell.converged;
          if (!dg.monotone) cell.all_monotone = false;
          const double scale =
              fit_cfg.tol * std::max(1.0, res.b_hat.col(static_cast<Eigen::Index>(r)).norm());
          cell.worst_residual_ratio =
              std::max(cell.worst_residual_ratio, dg.residual / scale);
        }
      }
    } catch (const std::exception& e) {
      cell.errs.clear();
      cell.error = e.what();
    }
  });

  ScalingResult out;
  for (std::size_t pi = 0; pi < np; ++pi) {
    const int p = cfg.p_list[pi];
    const PenaltySpec spec = scaling_penalty(cfg, p * cfg.d);
    // Structure stats are deterministic given the layout; measure them on the
    // first successfully generated truth of this dimension.
    StructureStats stats;
    bool have_stats = false;
    for (std::size_t ni = 0; ni < nn && !have_stats; ++ni)
      for (std::size_t run = 0; run < nr && !have_stats; ++run) {
        if (cells[(pi * nn + ni) * nr + run].errs.empty()) continue;
        const std::uint64_t cell_seed =
            mix_seed(cfg.master_seed, static_cast<std::uint64_t>(pi),
                     static_cast<std::uint64_t>(ni),
                     static_cast<std::uint64_t>(cfg.run_offset + static_cast<int>(run)));
        VarModel truth = make_ground_truth(cfg.kind, p, cfg.d, cfg.truth,
                                           cfg.target_radius, mix_seed(cell_seed, 1));
        stats = structure_stats(spec, coefficient_rows(truth));
        have_stats = true;
      }

    for (std::size_t ni = 0; ni < nn; ++ni) {
      const int n = cfg.n_list[ni];
      std::vector<const CellOutput*> ok;
      for (std::size_t run = 0; run < nr; ++run) {
        const CellOutput& cell = cells[(pi * nn + ni) * nr + run];
        out.total_fits += cell.fits;
        out.converged_fits += cell.converged;
        out.all_monotone = out.all_monotone && cell.all_monotone;
        out.worst_residual_ratio =
            std::max(out.worst_residual_ratio, cell.worst_residual_ratio);
        if (cell.errs.empty())
          out.failures.push_back(
              {p, n, static_cast<int>(run), cell.error.empty() ? "unknown" : cell.error});
        else
          ok.push_back(&cell);
      }
      if (ok.empty()) continue;

      const std::size_t before = out.records.size();
      std::size_t best = 0;
      double best_err = std::numeric_limits<double>::infinity();
      for (int gi = 0; gi < cfg.lambda_grid_size; ++gi) {
        const double rel =
            cfg.lambda_grid_size == 1
                ? 1.0
                : std::exp(std::log(cfg.lambda_ratio) * static_cast<double>(gi) /
                           (cfg.lambda_grid_size - 1));
        double err_mean = 0.0, lam_mean = 0.0, truth_mean = 0.0;
        for (const CellOutput* cell : ok) {
          err_mean += cell->errs[static_cast<std::size_t>(gi)];
          lam_mean += rel * cell->lambda_max_value;
          truth_mean += cell->truth_norm;
        }
        err_mean /= static_cast<double>(ok.size());
        lam_mean /= static_cast<double>(ok.size());
        truth_mean /= static_cast<double>(ok.size());
        double var = 0.0;
        for (const CellOutput* cell : ok) {
          const double d_err = cell->errs[static_cast<std::size_t>(gi)] - err_mean;
          var += d_err * d_err;
        }
        const double err_std =
            ok.size() > 1 ? std::sqrt(var / static_cast<double>(ok.size() - 1)) : 0.0;

        ScalingRecord rec;
        rec.kind = cfg.kind;
        rec.p = p;
        rec.d = cfg.d;
        rec.n = n;
        rec.stats = stats;
        rec.lambda = lam_mean;
        rec.lambda_rel = rel;
        rec.err_mean = err_mean;
        rec.err_std = err_std;
        rec.truth_norm = truth_mean;
        if (err_mean < best_err) {
          best_err = err_mean;
          best = out.records.size();
        }
        out.records.push_back(rec);
      }
      if (out.records.size() > before) out.records[best].is_best = true;
    }
  }
  return out;
}

std::vector<ExpCurve> rescale_axis(const std::vector<ScalingRecord>& records, double alpha) {
  std::map<int, std::vector<std::pair<double, double>>> by_p;
  for (const ScalingRecord& rec : records) {
    if (!rec.is_best) continue;
    const double dp = static_cast<double>(rec.p) * rec.d;
    double denom = 0.0;
    double numer = static_cast<double>(rec.n);
    switch (rec.kind) {
      case PenaltyKind::L1:
        denom = rec.stats.s * std::log(dp);
        break;
      case PenaltyKind::GroupLasso:
        denom = rec.stats.s_g * (rec.stats.m + std::log(rec.stats.k_groups));
        break;
      case PenaltyKind::SparseGroupLasso:
        denom = (alpha * rec.stats.s + (1.0 - alpha) * rec.stats.s_g) *
                (rec.stats.m + std::log(rec.stats.k_groups));
        break;
      case PenaltyKind::Owl:
        numer *= rec.stats.c_bar;
        denom = rec.stats.s * std::log(static_cast<double>(rec.p));
        break;
      case PenaltyKind::RidgeSq:
        throw config_error("no rescaled axis for the squared-ridge reference");
    }
    if (!(denom > 0.0)) throw numeric_error("degenerate rescaling denominator");
    by_p[rec.p].emplace_back(numer / denom, rec.err_mean);
  }
  std::vector<ExpCurve> curves;
  for (auto& [p, pts] : by_p) {
    std::sort(pts.begin(), pts.end());
    ExpCurve c;
    c.p = p;
    for (auto& [x, y] : pts) {
      c.x.push_back(x);
      c.y.push_back(y);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

AlignmentReport alignment_metric(const std::vector<ExpCurve>& curves) {
  if (curves.size() < 2) throw data_error("alignment needs at least two curves");
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (const ExpCurve& c : curves) {
    if (c.x.size() < 2) throw data_error("alignment needs curves with >= 2 points");
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!(c.x[i] > 0.0) || !(c.y[i] > 0.0))
        throw data_error("alignment needs positive coordinates");
      if (i > 0 && !(c.x[i] > c.x[i - 1]))
        throw data_error("alignment needs strictly increasing x per curve");
    }
    lo = std::max(lo, c.x.front());
    hi = std::min(hi, c.x.back());
  }
  if (!(hi > lo)) throw numeric_error("curves share no overlapping x-range");

  AlignmentReport out;
  constexpr int kPoints = 20;
  out.grid_x.resize(kPoints);
  for (int i = 0; i < kPoints; ++i)
    out.grid_x[static_cast<std::size_t>(i)] =
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (kPoints - 1));

  // log-log linear interpolation of each curve at the shared grid
  std::vector<std::vector<double>> vals(curves.size(), std::vector<double>(kPoints));
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const ExpCurve& c = curves[ci];
    for (int gi = 0; gi < kPoints; ++gi) {
      const double x = out.grid_x[static_cast<std::size_t>(gi)];
      std::size_t k = 1;
      while (k + 1 < c.x.size() && c.x[k] < x) ++k;
      const double lx0 = std::log(c.x[k - 1]), lx1 = std::log(c.x[k]);
      const double ly0 = std::log(c.y[k - 1]), ly1 = std::log(c.y[k]);
      const double w = (std::log(x) - lx0) / (lx1 - lx0);
      vals[ci][static_cast<std::size_t>(gi)] = std::exp(ly0 + w * (ly1 - ly0));
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int gi = 0; gi < kPoints; ++gi) {
      const double lx = std::log(out.grid_x[static_cast<std::size_t>(gi)]);
      const double ly = std::log(vals[ci][static_cast<std::size_t>(gi)]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double slope =
        (kPoints * sxy - sx * sy) / (kPoints * sxx - sx * sx);
    out.loglog_slope_per_p.emplace_back(c.p, slope);
  }

  for (int gi = 0; gi < kPoints; ++gi)
    for (std::size_t a = 0; a < curves.size(); ++a)
      for (std::size_t b = a + 1; b < curves.size(); ++b) {
        const double ya = vals[a][static_cast<std::size_t>(gi)];
        const double yb = vals[b][static_cast<std::size_t>(gi)];
        out.max_pairwise_dev =
            std::max(out.max_pairwise_dev, std::abs(ya - yb) / std::min(ya, yb));
      }
  return out;
}

LambdaTrend lambda_trend(const std::vector<ScalingRecord>& records, int fixed_n) {
  std::map<int, std::vector<std::pair<double, double>>> best_by_p;  // (N, lambda)
  std::set<int> all_n;
  for (const ScalingRecord& rec : records) {
    if (!rec.is_best) continue;
    best_by_p[rec.p].emplace_back(static_cast<double>(rec.n), rec.lambda);
    all_n.insert(rec.n);
  }
  if (best_by_p.size() < 3 || all_n.size() < 3)
    throw data_error("lambda trend needs >= 3 dimensions and >= 3 sample sizes");

  LambdaTrend out;
  for (auto& [p, pts] : best_by_p) {
    if (pts.size() < 2) throw data_error("lambda trend needs >= 2 sample sizes per p");
    std::sort(pts.begin(), pts.end());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (auto& [n, lam] : pts) {
      if (!(lam > 0.0)) throw numeric_error("non-positive best lambda");
      const double lx = std::log(n), ly = std::log(lam);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double count = static_cast<double>(pts.size());
    out.logn_slope_per_p.emplace_back(
        p, (count * sxy - sx * sy) / (count * sxx - sx * sx));
  }

  if (fixed_n < 0) {
    // Largest N for which every dimension has a best record.
    for (auto it = all_n.rbegin(); it != all_n.rend(); ++it) {
      bool everywhere = true;
      for (const auto& [p, pts] : best_by_p) {
        bool found = false;
        for (const auto& [n, lam] : pts)
          if (static_cast<int>(n) == *it) found = true;
        everywhere = everywhere && found;
      }
      if (everywhere) {
        fixed_n = *it;
        break;
      }
    }
  }
  if (fixed_n < 0) throw data_error("no sample size shared by all dimensions");
  out.fixed_n = fixed_n;

  std::vector<double> xs, ys;
  for (const auto& [p, pts] : best_by_p)
    for (const auto& [n, lam] : pts)
      if (static_cast<int>(n) == fixed_n) {
        xs.push_back(std::sqrt(std::log(static_cast<double>(p))));
        ys.push_back(lam);
      }
  if (xs.size() < 2) throw data_error("lambda trend needs >= 2 dimensions at the fixed N");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw numeric_error("degenerate lambda trend: zero variance");
  out.corr_sqrt_log_p = sxy / std::sqrt(sxx * syy);
  return out;
}

}  // namespace regvar
