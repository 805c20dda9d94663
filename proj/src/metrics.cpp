#include "ll1/metrics.hpp"

#include "ll1/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <vector>

namespace ll1 {

namespace detail {

std::pair<double, std::vector<Index>> solve_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols() || cost.rows() < 1)
    throw ShapeError("solve_assignment: cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Hungarian algorithm with row/column potentials, 1-based with a virtual
  // column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Index> assignment(n, 0);
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    assignment[p[j] - 1] = j - 1;
    total += cost(p[j] - 1, j - 1);
  }
  return {total, assignment};
}

}  // namespace detail

MseReport mse_factor(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw ShapeError("mse_factor: shapes differ");
  if (est.cols() < 1) throw ShapeError("mse_factor: empty factors");

  const Index r = est.cols();
  Matrix est_n(est.rows(), r), truth_n(truth.rows(), r);
  for (Index k = 0; k < r; ++k) {
    const double en = est.col(k).norm();
    const double tn = truth.col(k).norm();
    if (en == 0.0 || tn == 0.0)
      throw DegenerateInputError("mse_factor: zero column");
    est_n.col(k) = est.col(k) / en;
    truth_n.col(k) = truth.col(k) / tn;
  }

  Matrix cost(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j)
      cost(i, j) = (truth_n.col(i) - est_n.col(j)).squaredNorm();

  auto [total, assignment] = detail::solve_assignment(cost);
  MseReport report;
  report.value = total / static_cast<double>(r);
  report.matching = std::move(assignment);
  return report;
}

double sto_feasibility(const Matrix& s, double p) {
  if (p <= 0.0) throw InvalidDimsError("sto_feasibility: p must be positive");
  if (s.cols() < 1) throw ShapeError("sto_feasibility: empty matrix");
  const Index feasible =
      ((s.colwise().sum().array() - 1.0).abs() <= p).count();
  return 100.0 * static_cast<double>(feasible) /
         static_cast<double>(s.cols());
}

FeasibilityReport feasibility_report(const Matrix& s, Index image_rows,
                                     Index image_cols, Index rank, double p) {
  return {sto_feasibility(s, p), lr_feasibility(s, image_rows, image_cols, rank),
          p};
}

double lr_feasibility(const Matrix& s, Index image_rows, Index image_cols,
                      Index rank) {
  if (rank < 1 || rank > std::min(image_rows, image_cols))
    throw InvalidDimsError("lr_feasibility: rank out of range");
  if (s.rows() < 1) throw ShapeError("lr_feasibility: empty matrix");
  double sum = 0.0;
  for (Index r = 0; r < s.rows(); ++r) {
    const Matrix map = matricize_map(s, r, image_rows, image_cols);
    const Vector sigma = Eigen::BDCSVD<Matrix>(map).singularValues();
    const double total = sigma.sum();
    // all-zero map: treat 0/0 as full energy
    sum += total == 0.0 ? 100.0 : 100.0 * sigma.head(rank).sum() / total;
  }
  return sum / static_cast<double>(s.rows());
}

}  // namespace ll1
