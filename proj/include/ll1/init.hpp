#pragma once

#include "ll1/projections.hpp"
#include "ll1/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ll1 {

struct InitSpec {
  enum class Kind { spa, random };
  Kind kind = Kind::spa;
  std::uint64_t seed = 0;
};

// Greedy pure-pixel search: repeatedly pick the residual column of largest
// norm (ties break to the smallest index) and deflate against it. Returns the
// selected column indices of Y.
std::vector<Index> spa_indices(const Matrix& y, Index r);

// The original Y columns at spa_indices(y, r).
Matrix spa_endmembers(const Matrix& y, Index r);

// Least-squares abundances for a fixed C0, pushed through the feasibility
// projection. Falls back to uniform 1/R columns when C0 is rank deficient.
Matrix init_abundances(const Matrix& y, const Matrix& c0,
                       const FeasibilityMode& mode, Index image_rows,
                       Index image_cols, int ap_max_iters = 50,
                       double ap_tol = 1e-3);

// C0 = max(G1, 0), S0 = feasibility projection of G2, both i.i.d. standard
// Gaussian draws from the seeded generator.
std::pair<Matrix, Matrix> random_init(const ModelDims& dims,
                                      const FeasibilityMode& mode,
                                      std::uint64_t seed);

}  // namespace ll1
