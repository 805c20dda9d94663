#pragma once

#include "ll1/types.hpp"

#include <vector>

namespace ll1 {

struct MseReport {
  double value = 0.0;
  // matching[r] = column of est matched to column r of truth
  std::vector<Index> matching;
};

// Permutation-matched mean squared error between column-normalized factors:
// (1/R) min over permutations of sum_r ||t_r/||t_r|| - e_{pi_r}/||e_{pi_r}||||^2,
// solved exactly by optimal assignment. Apply to S' for abundance error.
MseReport mse_factor(const Matrix& est, const Matrix& truth);

// Percentage of columns whose sum is within p of 1.
double sto_feasibility(const Matrix& s, double p);

// Mean over maps of the top-`rank` singular value mass, in percent. An
// all-zero map counts as 100 (0/0 treated as full energy).
double lr_feasibility(const Matrix& s, Index image_rows, Index image_cols,
                      Index rank);

struct FeasibilityReport {
  double sto_percent = 0.0;
  double lr_energy_percent = 0.0;
  double p = 0.0;
};

FeasibilityReport feasibility_report(const Matrix& s, Index image_rows,
                                     Index image_cols, Index rank, double p);

namespace detail {

// Minimum-cost assignment on a square cost matrix (Hungarian algorithm).
// Returns the total cost and the column assigned to each row.
std::pair<double, std::vector<Index>> solve_assignment(const Matrix& cost);

}  // namespace detail

}  // namespace ll1
