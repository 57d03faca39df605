#pragma once

#include <vector>

#include <Eigen/Dense>

namespace regvar {

enum class PenaltyKind { L1, GroupLasso, SparseGroupLasso, Owl, RidgeSq };

const char* penalty_kind_name(PenaltyKind kind);

// Row-separable regularizer R applied to each length-dim coefficient row.
//  L1                sum_i |v_i|
//  GroupLasso        sum_G ||v_G||_2 over a disjoint cover of indices
//  SparseGroupLasso  alpha ||v||_1 + (1-alpha) sum_G ||v_G||_2
//  Owl               sum_i c_i |v|_(i), weights c non-increasing, c_1 > 0
//  RidgeSq           ||v||_2^2 (square of a norm, not a norm: no dual/scaling
//                    identities; kept as a reference method)
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::L1;
  int dim = 0;
  std::vector<std::vector<int>> groups;  // GroupLasso / SparseGroupLasso
  double alpha = 0.0;                    // SparseGroupLasso mixing in [0, 1]
  Eigen::VectorXd weights;               // Owl

  static PenaltySpec l1(int dim);
  static PenaltySpec ridge_sq(int dim);
  static PenaltySpec group_lasso(int dim, std::vector<std::vector<int>> groups);
  // Contiguous blocks with the given sizes (must sum to dim).
  static PenaltySpec group_lasso_blocks(int dim, const std::vector<int>& sizes);
  static PenaltySpec sparse_group_lasso(int dim, double alpha,
                                        std::vector<std::vector<int>> groups);
  static PenaltySpec sparse_group_lasso_blocks(int dim, double alpha,
                                               const std::vector<int>& sizes);
  static PenaltySpec owl(Eigen::VectorXd weights);
  // Linearly spaced weights from hi down to lo.
  static PenaltySpec owl_linear(int dim, double hi, double lo);

  bool is_norm() const { return kind != PenaltyKind::RidgeSq; }
  void validate() const;
};

double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& v);

// prox_{tR}(v) = argmin_u (1/2)||u - v||^2 + t R(u), exact per kind:
// entrywise soft threshold, blockwise shrink, their composition for the
// sparse group case, isotonic (pool-adjacent-violators) regression for the
// ordered-weighted case, and v/(1+2t) for the squared-ridge reference.
Eigen::VectorXd penalty_prox(const PenaltySpec& spec, const Eigen::VectorXd& v, double t);

// Dual norm R*(v) = sup_{R(u) <= 1} <v, u>. Rejects RidgeSq (not a norm).
// SparseGroupLasso uses bisection on t over the feasibility condition
// ||soft(v_G, t*alpha)||_2 <= t*(1-alpha) for every group (relative
// tolerance 1e-10); alpha = 0 or 1 dispatch to the pure norms exactly.
double dual_norm(const PenaltySpec& spec, const Eigen::VectorXd& v);

// Worst-case structure of a coefficient matrix, measured per row (rows are
// the length-dim vectors the penalty is applied to).
struct StructureStats {
  int s = 0;         // max nonzeros per row
  int s_g = 0;       // max groups touched per row
  int m = 0;         // largest group size
  int k_groups = 0;  // number of groups
  double c1 = 0.0;   // largest ordered weight
  double c_bar = 0.0;  // mean ordered weight
};

StructureStats structure_stats(const PenaltySpec& spec, const Eigen::MatrixXd& rows);

// Norm-compatibility constant of the error cone:
//   L1: 4 sqrt(s); GroupLasso: 4 sqrt(s_g);
//   SparseGroupLasso: 4 (alpha sqrt(s) + (1-alpha) sqrt(s_g));
//   Owl: 2 c_1^2 sqrt(s) / c_bar.
double compat_constant(const PenaltySpec& spec, const StructureStats& stats);

}  // namespace regvar
