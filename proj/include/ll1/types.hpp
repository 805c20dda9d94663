#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ll1 {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidDimsError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Model dimensions of the rank-(L,L,1) factorization: an I x J x K cube
// decomposed into R endmembers whose abundance maps have rank at most L
// (or nuclear norm at most nuclear_radius in the convex variant).
struct ModelDims {
  Index image_rows = 0;      // I
  Index image_cols = 0;      // J
  Index bands = 0;           // K
  Index map_rank = 0;        // L
  double nuclear_radius = 0; // L~
  Index endmembers = 0;      // R

  Index pixel_count() const { return image_rows * image_cols; }

  // L <= min(I, J), L~ > 0, R >= 1
  void validate() const;
};

// Observed reflectance cube, held matricized as a bands x pixels matrix with
// pixel ordering l = i + j*I (column-major over the spatial image). The
// tensor entry (i, j, k) is matricized()(k, i + j*I).
class HsiCube {
 public:
  HsiCube(Index image_rows, Index image_cols, Matrix matricized);

  Index image_rows() const { return image_rows_; }
  Index image_cols() const { return image_cols_; }
  Index bands() const { return matricized_.rows(); }
  Index pixel_count() const { return image_rows_ * image_cols_; }

  const Matrix& matricized() const { return matricized_; }

  Index pixel_index(Index i, Index j) const { return i + j * image_rows_; }
  double at(Index i, Index j, Index k) const;

 private:
  Index image_rows_;
  Index image_cols_;
  Matrix matricized_;
};

}  // namespace ll1
