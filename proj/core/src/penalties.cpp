#include "regvar/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "regvar/errors.hpp"

namespace regvar {

const char* penalty_kind_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::GroupLasso: return "gl";
    case PenaltyKind::SparseGroupLasso: return "sgl";
    case PenaltyKind::Owl: return "owl";
    case PenaltyKind::RidgeSq: return "ridge";
  }
  return "?";
}

namespace {

std::vector<std::vector<int>> blocks_from_sizes(int dim, const std::vector<int>& sizes) {
  std::vector<std::vector<int>> groups;
  groups.reserve(sizes.size());
  int at = 0;
  for (int sz : sizes) {
    if (sz <= 0) throw config_error("group sizes must be positive");
    std::vector<int> g(static_cast<std::size_t>(sz));
    std::iota(g.begin(), g.end(), at);
    at += sz;
    groups.push_back(std::move(g));
  }
  if (at != dim)
    throw config_error("group sizes sum to " + std::to_string(at) + ", expected " +
                       std::to_string(dim));
  return groups;
}

void check_partition(int dim, const std::vector<std::vector<int>>& groups) {
  std::vector<char> seen(static_cast<std::size_t>(dim), 0);
  for (const auto& g : groups) {
    if (g.empty()) throw config_error("empty penalty group");
    for (int idx : g) {
      if (idx < 0 || idx >= dim)
        throw config_error("group index " + std::to_string(idx) + " out of range");
      if (seen[static_cast<std::size_t>(idx)])
        throw config_error("group index " + std::to_string(idx) + " appears twice");
      seen[static_cast<std::size_t>(idx)] = 1;
    }
  }
  for (int i = 0; i < dim; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw config_error("index " + std::to_string(i) + " not covered by any group");
}

double soft(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

void check_vector(const PenaltySpec& spec, const Eigen::VectorXd& v) {
  if (v.size() != spec.dim)
    throw data_error("penalty expects length " + std::to_string(spec.dim) + ", got " +
                     std::to_string(v.size()));
  if (!v.allFinite()) throw data_error("penalty input has non-finite entries");
}

// Prox of the ordered-weighted L1 term: sort |v| descending, subtract the
// weights, project onto the non-increasing cone by pool-adjacent-violators,
// clip at zero, then undo the ordering and restore signs.
Eigen::VectorXd owl_prox(const Eigen::VectorXd& v, const Eigen::VectorXd& w, double t) {
  const Eigen::Index n = v.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(v[a]) > std::abs(v[b]); });

  std::vector<double> avg(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> start(static_cast<std::size_t>(n)), len(static_cast<std::size_t>(n));
  Eigen::Index blocks = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    avg[blocks] = std::abs(v[order[static_cast<std::size_t>(i)]]) - t * w[i];
    start[blocks] = i;
    len[blocks] = 1;
    ++blocks;
    while (blocks > 1 && avg[blocks - 2] <= avg[blocks - 1]) {
      avg[blocks - 2] = (len[blocks - 2] * avg[blocks - 2] + len[blocks - 1] * avg[blocks - 1]) /
                        (len[blocks - 2] + len[blocks - 1]);
      len[blocks - 2] += len[blocks - 1];
      --blocks;
    }
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const double val = std::max(0.0, avg[b]);
    for (Eigen::Index i = start[b]; i < start[b] + len[b]; ++i) {
      const int src = order[static_cast<std::size_t>(i)];
      out[src] = (v[src] < 0.0 ? -val : val);
    }
  }
  return out;
}

}  // namespace

PenaltySpec PenaltySpec::l1(int dim) {
  PenaltySpec s;
  s.kind = PenaltyKind::L1;
  s.dim = dim;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::ridge_sq(int dim) {
  PenaltySpec s;
  s.kind = PenaltyKind::RidgeSq;
  s.dim = dim;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::group_lasso(int dim, std::vector<std::vector<int>> groups) {
  PenaltySpec s;
  s.kind = PenaltyKind::GroupLasso;
  s.dim = dim;
  s.groups = std::move(groups);
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::group_lasso_blocks(int dim, const std::vector<int>& sizes) {
  return group_lasso(dim, blocks_from_sizes(dim, sizes));
}

PenaltySpec PenaltySpec::sparse_group_lasso(int dim, double alpha,
                                            std::vector<std::vector<int>> groups) {
  PenaltySpec s;
  s.kind = PenaltyKind::SparseGroupLasso;
  s.dim = dim;
  s.alpha = alpha;
  s.groups = std::move(groups);
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::sparse_group_lasso_blocks(int dim, double alpha,
                                                   const std::vector<int>& sizes) {
  return sparse_group_lasso(dim, alpha, blocks_from_sizes(dim, sizes));
}

PenaltySpec PenaltySpec::owl(Eigen::VectorXd weights) {
  PenaltySpec s;
  s.kind = PenaltyKind::Owl;
  s.dim = static_cast<int>(weights.size());
  s.weights = std::move(weights);
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::owl_linear(int dim, double hi, double lo) {
  if (dim < 1) throw config_error("penalty dimension must be positive");
  Eigen::VectorXd w(dim);
  if (dim == 1)
    w[0] = hi;
  else
    for (int i = 0; i < dim; ++i)
      w[i] = hi + (lo - hi) * static_cast<double>(i) / (dim - 1);
  return owl(std::move(w));
}

void PenaltySpec::validate() const {
  if (dim < 1) throw config_error("penalty dimension must be positive");
  switch (kind) {
    case PenaltyKind::L1:
    case PenaltyKind::RidgeSq:
      break;
    case PenaltyKind::GroupLasso:
      check_partition(dim, groups);
      break;
    case PenaltyKind::SparseGroupLasso:
      if (!(alpha >= 0.0) || !(alpha <= 1.0))
        throw config_error("sparse-group mixing alpha must lie in [0, 1]");
      check_partition(dim, groups);
      break;
    case PenaltyKind::Owl: {
      if (weights.size() != dim) throw config_error("ordered weights must have length dim");
      if (!(weights[0] > 0.0)) throw config_error("largest ordered weight must be positive");
      for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) throw config_error("ordered weights must be non-negative");
        if (i > 0 && weights[i] > weights[i - 1] + 1e-15)
          throw config_error("ordered weights must be non-increasing");
      }
      break;
    }
  }
}

double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& v) {
  check_vector(spec, v);
  switch (spec.kind) {
    case PenaltyKind::L1:
      return v.lpNorm<1>();
    case PenaltyKind::RidgeSq:
      return v.squaredNorm();
    case PenaltyKind::GroupLasso: {
      double sum = 0.0;
      for (const auto& g : spec.groups) {
        double sq = 0.0;
        for (int idx : g) sq += v[idx] * v[idx];
        sum += std::sqrt(sq);
      }
      return sum;
    }
    case PenaltyKind::SparseGroupLasso: {
      double sum = 0.0;
      for (const auto& g : spec.groups) {
        double sq = 0.0;
        for (int idx : g) sq += v[idx] * v[idx];
        sum += std::sqrt(sq);
      }
      return spec.alpha * v.lpNorm<1>() + (1.0 - spec.alpha) * sum;
    }
    case PenaltyKind::Owl: {
      Eigen::VectorXd a = v.cwiseAbs();
      std::sort(a.data(), a.data() + a.size(), std::greater<double>());
      return a.dot(spec.weights);
    }
  }
  throw config_error("unknown penalty kind");
}

Eigen::VectorXd penalty_prox(const PenaltySpec& spec, const Eigen::VectorXd& v, double t) {
  check_vector(spec, v);
  if (!(t > 0.0)) throw config_error("prox step must be positive");
  switch (spec.kind) {
    case PenaltyKind::L1: {
      Eigen::VectorXd out(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft(v[i], t);
      return out;
    }
    case PenaltyKind::RidgeSq:
      return v / (1.0 + 2.0 * t);
    case PenaltyKind::GroupLasso: {
      Eigen::VectorXd out = v;
      for (const auto& g : spec.groups) {
        double sq = 0.0;
        for (int idx : g) sq += v[idx] * v[idx];
        const double nrm = std::sqrt(sq);
        const double scale = nrm > t ? 1.0 - t / nrm : 0.0;
        for (int idx : g) out[idx] = scale * v[idx];
      }
      return out;
    }
    case PenaltyKind::SparseGroupLasso: {
      // Exact composition: entrywise shrink by t*alpha, then blockwise shrink
      // by t*(1-alpha).
      Eigen::VectorXd out(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft(v[i], t * spec.alpha);
      const double tg = t * (1.0 - spec.alpha);
      for (const auto& g : spec.groups) {
        double sq = 0.0;
        for (int idx : g) sq += out[idx] * out[idx];
        const double nrm = std::sqrt(sq);
        const double scale = nrm > tg ? 1.0 - tg / nrm : 0.0;
        for (int idx : g) out[idx] *= scale;
      }
      return out;
    }
    case PenaltyKind::Owl:
      return owl_prox(v, spec.weights, t);
  }
  throw config_error("unknown penalty kind");
}

double dual_norm(const PenaltySpec& spec, const Eigen::VectorXd& v) {
  check_vector(spec, v);
  switch (spec.kind) {
    case PenaltyKind::RidgeSq:
      throw config_error("squared ridge is not a norm; dual norm undefined");
    case PenaltyKind::L1:
      return v.lpNorm<Eigen::Infinity>();
    case PenaltyKind::GroupLasso: {
      double best = 0.0;
      for (const auto& g : spec.groups) {
        double sq = 0.0;
        for (int idx : g) sq += v[idx] * v[idx];
        best = std::max(best, std::sqrt(sq));
      }
      return best;
    }
    case PenaltyKind::Owl: {
      // max_k (sum of k largest |v|) / (sum of k largest weights).
      Eigen::VectorXd a = v.cwiseAbs();
      std::sort(a.data(), a.data() + a.size(), std::greater<double>());
      double num = 0.0, den = 0.0, best = 0.0;
      for (Eigen::Index k = 0; k < a.size(); ++k) {
        num += a[k];
        den += spec.weights[k];
        if (den > 0.0) best = std::max(best, num / den);
      }
      return best;
    }
    case PenaltyKind::SparseGroupLasso: {
      if (spec.alpha == 1.0) return dual_norm(PenaltySpec::l1(spec.dim), v);
      if (spec.alpha == 0.0) return dual_norm(PenaltySpec::group_lasso(spec.dim, spec.groups), v);
      const double linf = v.lpNorm<Eigen::Infinity>();
      if (linf == 0.0) return 0.0;
      // t is feasible (R*(v) <= t) iff every group passes
      // ||soft(v_G, t*alpha)||_2 <= t*(1-alpha); the margin grows with t, so
      // bisection on [0, hi] converges to the dual norm.
      const auto feasible = [&](double t) {
        const double budget = t * (1.0 - spec.alpha);
        for (const auto& g : spec.groups) {
          double sq = 0.0;
          for (int idx : g) {
            const double s = soft(v[idx], t * spec.alpha);
            sq += s * s;
          }
          if (std::sqrt(sq) > budget) return false;
        }
        return true;
      };
      double hi = linf / std::max(spec.alpha, 1e-16);
      for (const auto& g : spec.groups) {
        double sq = 0.0;
        for (int idx : g) sq += v[idx] * v[idx];
        hi = std::max(hi, std::sqrt(sq) / std::max(1.0 - spec.alpha, 1e-16));
      }
      double lo = 0.0;
      for (int it = 0; it < 200 && (hi - lo) > 1e-10 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
      }
      return hi;
    }
  }
  throw config_error("unknown penalty kind");
}

StructureStats structure_stats(const PenaltySpec& spec, const Eigen::MatrixXd& rows) {
  if (rows.cols() != spec.dim)
    throw data_error("structure stats expect rows of length " + std::to_string(spec.dim));
  StructureStats st;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    int nnz = 0;
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      if (rows(r, c) != 0.0) ++nnz;
    st.s = std::max(st.s, nnz);
  }
  if (spec.kind == PenaltyKind::GroupLasso || spec.kind == PenaltyKind::SparseGroupLasso) {
    st.k_groups = static_cast<int>(spec.groups.size());
    for (const auto& g : spec.groups) st.m = std::max(st.m, static_cast<int>(g.size()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      int hit = 0;
      for (const auto& g : spec.groups) {
        bool any = false;
        for (int idx : g)
          if (rows(r, idx) != 0.0) {
            any = true;
            break;
          }
        if (any) ++hit;
      }
      st.s_g = std::max(st.s_g, hit);
    }
  }
  if (spec.kind == PenaltyKind::Owl) {
    st.c1 = spec.weights[0];
    st.c_bar = spec.weights.mean();
  }
  return st;
}

double compat_constant(const PenaltySpec& spec, const StructureStats& stats) {
  switch (spec.kind) {
    case PenaltyKind::L1:
      return 4.0 * std::sqrt(static_cast<double>(stats.s));
    case PenaltyKind::GroupLasso:
      return 4.0 * std::sqrt(static_cast<double>(stats.s_g));
    case PenaltyKind::SparseGroupLasso:
      return 4.0 * (spec.alpha * std::sqrt(static_cast<double>(stats.s)) +
                    (1.0 - spec.alpha) * std::sqrt(static_cast<double>(stats.s_g)));
    case PenaltyKind::Owl: {
      if (!(stats.c_bar > 0.0))
        throw config_error("ordered-weight compatibility needs a positive mean weight");
      return 2.0 * stats.c1 * stats.c1 * std::sqrt(static_cast<double>(stats.s)) / stats.c_bar;
    }
    case PenaltyKind::RidgeSq:
      throw config_error("squared ridge has no norm-compatibility constant");
  }
  throw config_error("unknown penalty kind");
}

}  // namespace regvar
