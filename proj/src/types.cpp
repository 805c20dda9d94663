#include "ll1/types.hpp"

namespace ll1 {

void ModelDims::validate() const {
  if (image_rows < 1 || image_cols < 1 || bands < 1)
    throw InvalidDimsError("cube dimensions must be positive");
  if (endmembers < 1) throw InvalidDimsError("endmember count must be >= 1");
  if (map_rank < 1) throw InvalidDimsError("map rank must be >= 1");
  if (map_rank > std::min(image_rows, image_cols))
    throw InvalidDimsError("map rank exceeds min(I, J)");
  if (nuclear_radius <= 0.0)
    throw InvalidDimsError("nuclear radius must be positive");
}

HsiCube::HsiCube(Index image_rows, Index image_cols, Matrix matricized)
    : image_rows_(image_rows),
      image_cols_(image_cols),
      matricized_(std::move(matricized)) {
  if (image_rows_ < 1 || image_cols_ < 1 || matricized_.rows() < 1)
    throw InvalidDimsError("cube dimensions must be positive");
  if (matricized_.cols() != image_rows_ * image_cols_)
    throw ShapeError("matricized cube must have I*J columns");
  if (!matricized_.allFinite())
    throw NumericalError("cube entries must be finite");
}

double HsiCube::at(Index i, Index j, Index k) const {
  if (i < 0 || i >= image_rows_ || j < 0 || j >= image_cols_ || k < 0 ||
      k >= bands())
    throw InvalidDimsError("cube index out of range");
  return matricized_(k, pixel_index(i, j));
}

}  // namespace ll1
