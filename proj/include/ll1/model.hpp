#pragma once

#include "ll1/types.hpp"

namespace ll1 {

// Read-only view of row r of an R x IJ abundance matrix as its I x J spatial
// map, without copying. Entry (i, j) aliases s(r, i + j*I).
using MapView =
    Eigen::Map<const Matrix, Eigen::Unaligned,
               Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

MapView map_view(const Matrix& s, Index r, Index image_rows, Index image_cols);

// Copying variants of the row <-> map reshape pair.
Matrix matricize_map(const Matrix& s, Index r, Index image_rows,
                     Index image_cols);
Vector tensorize_map(const Eigen::Ref<const Matrix>& map);

// Y = C*S presented as a cube.
HsiCube synthesize(const Matrix& c, const Matrix& s, Index image_rows,
                   Index image_cols);

// 0.5*||Y - C*S||_F^2 + sum_r theta(r)*phi(S_r) with the smoothed lq TV
// penalty phi from tv.hpp.
double objective(const Matrix& y, const Matrix& c, const Matrix& s,
                 Index image_rows, Index image_cols, const Vector& theta,
                 double q, double eps);

// ||Y - C*S||_F / ||Y||_F
double relative_fit(const Matrix& y, const Matrix& c, const Matrix& s);

struct IdentifiabilityReport {
  bool satisfied = false;
  // IJ - L^2*R
  long long pixel_margin = 0;
  // min(floor(I/L), R) + min(floor(J/L), R) + min(K, R)
  long long term_sum = 0;
  // term_sum - (2R + 2)
  long long term_margin = 0;
};

// Sufficient (not necessary) condition for essential uniqueness of the
// decomposition with generic factors. Callers should warn, not block, on an
// unsatisfied report.
IdentifiabilityReport check_identifiability(const ModelDims& dims);

}  // namespace ll1
