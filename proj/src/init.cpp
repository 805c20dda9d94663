#include "ll1/init.hpp"

#include "ll1/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace ll1 {

std::vector<Index> spa_indices(const Matrix& y, Index r) {
  if (r < 1) throw InvalidDimsError("spa: need at least one endmember");
  if (r > y.cols())
    throw InvalidDimsError("spa: more endmembers than pixels");

  Matrix residual = y;
  Vector norms = residual.colwise().norm();
  const double reference = norms.maxCoeff();
  if (reference == 0.0)
    throw DegenerateInputError("spa: data has no nonzero column");
  const double collapse_tol = 1e-12 * reference;

  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(r));
  for (Index step = 0; step < r; ++step) {
    Index best = 0;
    double best_norm = -1.0;
    for (Index j = 0; j < residual.cols(); ++j) {
      if (norms(j) > best_norm) {  // ties keep the smallest index
        best_norm = norms(j);
        best = j;
      }
    }
    if (best_norm <= collapse_tol)
      throw DegenerateInputError(
          "spa: residual collapsed before selecting all endmembers");
    picked.push_back(best);
    const Vector u = residual.col(best) / best_norm;
    residual -= u * (u.transpose() * residual);
    norms = residual.colwise().norm();
  }
  return picked;
}

Matrix spa_endmembers(const Matrix& y, Index r) {
  const std::vector<Index> picked = spa_indices(y, r);
  Matrix c(y.rows(), r);
  for (Index k = 0; k < r; ++k) c.col(k) = y.col(picked[k]);
  return c;
}

Matrix init_abundances(const Matrix& y, const Matrix& c0,
                       const FeasibilityMode& mode, Index image_rows,
                       Index image_cols, int ap_max_iters, double ap_tol) {
  if (y.rows() != c0.rows())
    throw ShapeError("init_abundances: band counts differ");
  const Index r = c0.cols();
  Eigen::ColPivHouseholderQR<Matrix> qr(c0);
  Matrix s_ls;
  if (qr.rank() < r)
    s_ls = Matrix::Constant(r, y.cols(), 1.0 / static_cast<double>(r));
  else
    s_ls = qr.solve(y);
  return project_feasible_set(s_ls, mode, image_rows, image_cols,
                              ap_max_iters, ap_tol)
      .projected;
}

std::pair<Matrix, Matrix> random_init(const ModelDims& dims,
                                      const FeasibilityMode& mode,
                                      std::uint64_t seed) {
  SeededRng rng(seed);
  Matrix c0 =
      rng.gaussian_matrix(dims.bands, dims.endmembers).cwiseMax(0.0);
  Matrix g2 = rng.gaussian_matrix(dims.endmembers, dims.pixel_count());
  Matrix s0 = project_feasible_set(g2, mode, dims.image_rows, dims.image_cols)
                  .projected;
  return {std::move(c0), std::move(s0)};
}

}  // namespace ll1
