#include "ll1/projections.hpp"

#include "ll1/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ll1 {

namespace {

// Threshold tau with sum(max(v - tau, 0)) = radius, from the sorted-descending
// copy of v.
double simplex_threshold(std::vector<double>& sorted_desc, double radius) {
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < sorted_desc.size(); ++i) {
    cumsum += sorted_desc[i];
    const double candidate = (cumsum - radius) / static_cast<double>(i + 1);
    if (sorted_desc[i] - candidate > 0.0)
      tau = candidate;
    else
      break;
  }
  return tau;
}

struct ThinSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};

ThinSvd thin_svd(const Eigen::Ref<const Matrix>& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("SVD did not converge");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace

FeasibilityMode FeasibilityMode::ExactRank(Index rank) {
  if (rank < 1) throw InvalidDimsError("feasibility rank must be >= 1");
  FeasibilityMode mode;
  mode.kind = Kind::exact_rank;
  mode.rank = rank;
  return mode;
}

FeasibilityMode FeasibilityMode::NuclearBall(double radius) {
  if (radius <= 0.0)
    throw InvalidDimsError("nuclear-ball radius must be positive");
  FeasibilityMode mode;
  mode.kind = Kind::nuclear_ball;
  mode.radius = radius;
  return mode;
}

const char* FeasibilityMode::name() const {
  return kind == Kind::exact_rank ? "lr" : "nn";
}

Vector project_simplex(const Eigen::Ref<const Vector>& v, double radius) {
  if (radius <= 0.0)
    throw InvalidDimsError("project_simplex: radius must be positive");
  if (!v.allFinite())
    throw NumericalError("project_simplex: non-finite input");
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const double tau = simplex_threshold(sorted, radius);
  return (v.array() - tau).max(0.0).matrix();
}

Matrix project_columns_simplex(const Eigen::Ref<const Matrix>& m) {
  Matrix out(m.rows(), m.cols());
  std::vector<double> buffer(static_cast<std::size_t>(m.rows()));
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) buffer[i] = m(i, j);
    std::sort(buffer.begin(), buffer.end(), std::greater<double>());
    const double tau = simplex_threshold(buffer, 1.0);
    out.col(j) = (m.col(j).array() - tau).max(0.0).matrix();
  }
  return out;
}

Matrix project_rank(const Eigen::Ref<const Matrix>& m, Index rank) {
  if (rank < 1 || rank > std::min(m.rows(), m.cols()))
    throw InvalidDimsError("project_rank: rank out of range");
  ThinSvd svd = thin_svd(m);
  return svd.u.leftCols(rank) * svd.sigma.head(rank).asDiagonal() *
         svd.v.leftCols(rank).transpose();
}

Matrix project_nuclear_ball(const Eigen::Ref<const Matrix>& m, double radius) {
  if (radius <= 0.0)
    throw InvalidDimsError("project_nuclear_ball: radius must be positive");
  ThinSvd svd = thin_svd(m);
  if (svd.sigma.sum() <= radius) return m;
  const Vector shrunk = project_simplex(svd.sigma, radius);
  return svd.u * shrunk.asDiagonal() * svd.v.transpose();
}

ApResult project_feasible_set(const Matrix& w0, const FeasibilityMode& mode,
                              Index image_rows, Index image_cols,
                              int max_ap_iters, double ap_tol) {
  if (w0.cols() != image_rows * image_cols)
    throw ShapeError("project_feasible_set: matrix must have I*J columns");
  if (mode.is_exact_rank() &&
      mode.rank > std::min(image_rows, image_cols))
    throw InvalidDimsError("project_feasible_set: rank exceeds min(I, J)");
  if (ap_tol <= 0.0)
    throw InvalidDimsError("project_feasible_set: ap_tol must be positive");
  if (max_ap_iters < 1)
    throw InvalidDimsError("project_feasible_set: need at least one sweep");
  if (!w0.allFinite())
    throw NumericalError("project_feasible_set: non-finite input");

  ApResult result;
  Matrix w = w0;
  Matrix f(w.rows(), w.cols());
  for (int k = 1; k <= max_ap_iters; ++k) {
    for (Index r = 0; r < w.rows(); ++r) {
      const Matrix map = matricize_map(w, r, image_rows, image_cols);
      const Matrix projected = mode.is_exact_rank()
                                   ? project_rank(map, mode.rank)
                                   : project_nuclear_ball(map, mode.radius);
      f.row(r) = tensorize_map(projected).transpose();
    }
    Matrix w_next = project_columns_simplex(f);
    if (!w_next.allFinite())
      throw NumericalError("project_feasible_set: iterate became non-finite");
    const double denom =
        std::max(w.norm(), std::numeric_limits<double>::min());
    result.last_relative_change = (w_next - w).norm() / denom;
    result.iterations = k;
    w.swap(w_next);
    if (result.last_relative_change < ap_tol) break;
  }
  result.projected = std::move(w);
  return result;
}

}  // namespace ll1
