#pragma once

#include "ll1/types.hpp"

namespace ll1 {

// Circular forward differences of a spatial map. diff_h differences along j
// (horizontal neighbours), diff_v along i, both wrapping at the border:
//
//   diff_h(m)(i, j) = m(i, j) - m(i, (j+1) mod J)
//   diff_v(m)(i, j) = m(i, j) - m((i+1) mod I, j)
//
// Matrix-free equivalents of m*D' and D*m for the circulant forward
// difference D; the dense Kronecker forms exist only in test oracles.
Matrix diff_h(const Eigen::Ref<const Matrix>& map);
Matrix diff_v(const Eigen::Ref<const Matrix>& map);

// Exact adjoints: <diff_h(X), D> = <X, diff_h_adjoint(D)> for all X, D.
Matrix diff_h_adjoint(const Eigen::Ref<const Matrix>& d);
Matrix diff_v_adjoint(const Eigen::Ref<const Matrix>& d);

// Smoothed lq TV value of a map: sum_i (d_i^2 + eps)^(q/2) over the entries
// of both difference images. Requires 0 < q <= 1, eps > 0.
double phi_value(const Eigen::Ref<const Matrix>& map, double q, double eps);

// Diagonal of the quadratic majorizer at the given difference image:
// w_i = (d_i^2 + eps)^((q-2)/2). The lone factor q is applied by the
// gradient assembly, not stored here.
Matrix majorizer_weights(const Eigen::Ref<const Matrix>& d, double q,
                         double eps);

// Gradient of sum_r theta(r)*phi(S_r) with respect to S, row per endmember.
Matrix tv_gradient(const Matrix& s, Index image_rows, Index image_cols,
                   const Vector& theta, double q, double eps);

// Upper bound on the spectral norm of the TV part of the S-step curvature,
// using sigma_max(circular difference) = 2 and the max majorizer weight as
// sigma_max of the diagonal factor.
double tv_lipschitz_term(const Matrix& s, Index image_rows, Index image_cols,
                         const Vector& theta, double q, double eps);

}  // namespace ll1
