#pragma once

#include "ll1/types.hpp"

namespace ll1 {

// Per-map low-rank constraint set: either rank(S_r) <= rank (nonconvex) or
// ||S_r||_* <= radius (its convex relaxation).
struct FeasibilityMode {
  enum class Kind { exact_rank, nuclear_ball };

  Kind kind = Kind::exact_rank;
  Index rank = 0;
  double radius = 0.0;

  static FeasibilityMode ExactRank(Index rank);
  static FeasibilityMode NuclearBall(double radius);

  bool is_exact_rank() const { return kind == Kind::exact_rank; }
  const char* name() const;
};

struct ApResult {
  Matrix projected;
  int iterations = 0;
  double last_relative_change = 0.0;
};

// Euclidean projection onto {x >= 0, 1'x = radius} by sort-and-threshold.
Vector project_simplex(const Eigen::Ref<const Vector>& v, double radius);

// project_simplex with radius 1 applied to every column independently.
Matrix project_columns_simplex(const Eigen::Ref<const Matrix>& m);

// Best rank-<=rank approximation via truncated SVD.
Matrix project_rank(const Eigen::Ref<const Matrix>& m, Index rank);

// Euclidean projection onto the nuclear-norm ball of the given radius.
// A no-op for interior points; otherwise the singular values are projected
// onto the simplex of that radius and the matrix reassembled.
Matrix project_nuclear_ball(const Eigen::Ref<const Matrix>& m, double radius);

// Alternating projection of an R x IJ matrix onto the intersection of the
// per-map low-rank set and the column simplex set. Each sweep projects every
// map onto the low-rank set, then every column onto the probability simplex,
// so the returned iterate always satisfies the simplex constraints exactly
// while the low-rank constraint holds approximately. Stops when the relative
// change of the iterate drops below ap_tol or after max_ap_iters sweeps.
ApResult project_feasible_set(const Matrix& w0, const FeasibilityMode& mode,
                              Index image_rows, Index image_cols,
                              int max_ap_iters = 50, double ap_tol = 1e-3);

}  // namespace ll1
