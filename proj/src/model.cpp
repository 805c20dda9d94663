#include "ll1/model.hpp"

#include "ll1/tv.hpp"

#include <algorithm>
#include <cmath>

namespace ll1 {

MapView map_view(const Matrix& s, Index r, Index image_rows,
                 Index image_cols) {
  if (image_rows < 1 || image_cols < 1)
    throw InvalidDimsError("map dimensions must be positive");
  if (s.cols() != image_rows * image_cols)
    throw ShapeError("abundance matrix must have I*J columns");
  if (r < 0 || r >= s.rows())
    throw InvalidDimsError("abundance row index out of range");
  // Row r of the column-major R x IJ matrix: entry (i, j) sits at offset
  // r + (i + j*I)*R, so the map has inner stride R and outer stride I*R.
  const Index stride = s.rows();
  return MapView(s.data() + r, image_rows, image_cols,
                 Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(
                     image_rows * stride, stride));
}

Matrix matricize_map(const Matrix& s, Index r, Index image_rows,
                     Index image_cols) {
  return map_view(s, r, image_rows, image_cols);
}

Vector tensorize_map(const Eigen::Ref<const Matrix>& map) {
  return Eigen::Map<const Vector>(map.data(), map.size());
}

HsiCube synthesize(const Matrix& c, const Matrix& s, Index image_rows,
                   Index image_cols) {
  if (c.cols() != s.rows())
    throw ShapeError("endmember/abundance inner dimensions differ");
  if (s.cols() != image_rows * image_cols)
    throw ShapeError("abundance matrix must have I*J columns");
  return HsiCube(image_rows, image_cols, c * s);
}

double objective(const Matrix& y, const Matrix& c, const Matrix& s,
                 Index image_rows, Index image_cols, const Vector& theta,
                 double q, double eps) {
  if (y.rows() != c.rows() || c.cols() != s.rows() || y.cols() != s.cols())
    throw ShapeError("objective: factor shapes do not match the data");
  if (theta.size() != s.rows())
    throw ShapeError("objective: theta must have one weight per endmember");
  if (q <= 0.0 || q > 1.0 || eps <= 0.0)
    throw InvalidDimsError("objective: require 0 < q <= 1 and eps > 0");
  double value = 0.5 * (y - c * s).squaredNorm();
  for (Index r = 0; r < s.rows(); ++r) {
    if (theta(r) == 0.0) continue;
    value += theta(r) *
             phi_value(matricize_map(s, r, image_rows, image_cols), q, eps);
  }
  return value;
}

double relative_fit(const Matrix& y, const Matrix& c, const Matrix& s) {
  if (y.rows() != c.rows() || c.cols() != s.rows() || y.cols() != s.cols())
    throw ShapeError("relative_fit: factor shapes do not match the data");
  const double denom = y.norm();
  if (denom == 0.0)
    throw DegenerateInputError("relative_fit: zero data matrix");
  return (y - c * s).norm() / denom;
}

IdentifiabilityReport check_identifiability(const ModelDims& dims) {
  if (dims.image_rows < 1 || dims.image_cols < 1 || dims.bands < 1 ||
      dims.endmembers < 1 || dims.map_rank < 1)
    throw InvalidDimsError("check_identifiability: dimensions must be positive");
  if (dims.map_rank > std::min(dims.image_rows, dims.image_cols))
    throw InvalidDimsError("check_identifiability: L exceeds min(I, J)");

  const long long i = dims.image_rows;
  const long long j = dims.image_cols;
  const long long k = dims.bands;
  const long long l = dims.map_rank;
  const long long r = dims.endmembers;

  IdentifiabilityReport report;
  report.pixel_margin = i * j - l * l * r;
  report.term_sum = std::min(i / l, r) + std::min(j / l, r) + std::min(k, r);
  report.term_margin = report.term_sum - (2 * r + 2);
  report.satisfied = report.pixel_margin >= 0 && report.term_margin >= 0;
  return report;
}

}  // namespace ll1
