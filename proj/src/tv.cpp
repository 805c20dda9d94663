#include "ll1/tv.hpp"

#include "ll1/model.hpp"

#include <cmath>

namespace ll1 {

namespace {

void check_tv_params(double q, double eps) {
  if (q <= 0.0 || q > 1.0) throw InvalidDimsError("tv: require 0 < q <= 1");
  if (eps <= 0.0) throw InvalidDimsError("tv: require eps > 0");
}

}  // namespace

Matrix diff_h(const Eigen::Ref<const Matrix>& map) {
  const Index rows = map.rows(), cols = map.cols();
  Matrix out(rows, cols);
  if (cols > 1)
    out.leftCols(cols - 1) = map.leftCols(cols - 1) - map.rightCols(cols - 1);
  out.col(cols - 1) = map.col(cols - 1) - map.col(0);
  return out;
}

Matrix diff_v(const Eigen::Ref<const Matrix>& map) {
  const Index rows = map.rows(), cols = map.cols();
  Matrix out(rows, cols);
  if (rows > 1)
    out.topRows(rows - 1) = map.topRows(rows - 1) - map.bottomRows(rows - 1);
  out.row(rows - 1) = map.row(rows - 1) - map.row(0);
  return out;
}

Matrix diff_h_adjoint(const Eigen::Ref<const Matrix>& d) {
  const Index rows = d.rows(), cols = d.cols();
  Matrix out(rows, cols);
  if (cols > 1)
    out.rightCols(cols - 1) = d.rightCols(cols - 1) - d.leftCols(cols - 1);
  out.col(0) = d.col(0) - d.col(cols - 1);
  return out;
}

Matrix diff_v_adjoint(const Eigen::Ref<const Matrix>& d) {
  const Index rows = d.rows(), cols = d.cols();
  Matrix out(rows, cols);
  if (rows > 1)
    out.bottomRows(rows - 1) = d.bottomRows(rows - 1) - d.topRows(rows - 1);
  out.row(0) = d.row(0) - d.row(rows - 1);
  return out;
}

double phi_value(const Eigen::Ref<const Matrix>& map, double q, double eps) {
  check_tv_params(q, eps);
  const double half_q = 0.5 * q;
  return (diff_h(map).array().square() + eps).pow(half_q).sum() +
         (diff_v(map).array().square() + eps).pow(half_q).sum();
}

Matrix majorizer_weights(const Eigen::Ref<const Matrix>& d, double q,
                         double eps) {
  if (eps <= 0.0) throw InvalidDimsError("tv: require eps > 0");
  return (d.array().square() + eps).pow(0.5 * (q - 2.0)).matrix();
}

Matrix tv_gradient(const Matrix& s, Index image_rows, Index image_cols,
                   const Vector& theta, double q, double eps) {
  check_tv_params(q, eps);
  if (theta.size() != s.rows())
    throw ShapeError("tv_gradient: theta must have one weight per endmember");
  Matrix grad = Matrix::Zero(s.rows(), s.cols());
  for (Index r = 0; r < s.rows(); ++r) {
    if (theta(r) == 0.0) continue;
    const Matrix map = matricize_map(s, r, image_rows, image_cols);
    const Matrix dh = diff_h(map);
    const Matrix dv = diff_v(map);
    const Matrix g_map =
        diff_h_adjoint(majorizer_weights(dh, q, eps).cwiseProduct(dh)) +
        diff_v_adjoint(majorizer_weights(dv, q, eps).cwiseProduct(dv));
    grad.row(r) =
        (q * theta(r)) *
        Eigen::Map<const Vector>(g_map.data(), g_map.size()).transpose();
  }
  return grad;
}

double tv_lipschitz_term(const Matrix& s, Index image_rows, Index image_cols,
                         const Vector& theta, double q, double eps) {
  check_tv_params(q, eps);
  if (theta.size() != s.rows())
    throw ShapeError("tv_lipschitz_term: theta size mismatch");
  // sigma_max of the circulant forward difference is exactly 2 in each
  // direction; the diagonal weight matrix contributes its largest entry,
  // i.e. the weight of the smallest |difference|.
  constexpr double sigma_sq = 4.0;
  double term_h = 0.0, term_v = 0.0;
  for (Index r = 0; r < s.rows(); ++r) {
    if (theta(r) == 0.0) continue;
    const Matrix map = matricize_map(s, r, image_rows, image_cols);
    const double wh_max = std::pow(
        diff_h(map).array().square().minCoeff() + eps, 0.5 * (q - 2.0));
    const double wv_max = std::pow(
        diff_v(map).array().square().minCoeff() + eps, 0.5 * (q - 2.0));
    term_h = std::max(term_h, theta(r) * wh_max);
    term_v = std::max(term_v, theta(r) * wv_max);
  }
  return q * sigma_sq * (term_h + term_v);
}

}  // namespace ll1
