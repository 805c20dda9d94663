#include "ll1/solver.hpp"

#include "ll1/metrics.hpp"
#include "ll1/model.hpp"
#include "ll1/rng.hpp"
#include "ll1/tv.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <limits>

namespace ll1 {

namespace detail {

double largest_eigenvalue(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols())
    throw ShapeError("largest_eigenvalue: matrix must be square");
  if (!a.allFinite())
    throw NumericalError("largest_eigenvalue: non-finite matrix");
  if (a.rows() == 0) return 0.0;
  if (a.rows() == 1) return std::max(a(0, 0), 0.0);

  // deterministic generic start direction
  SeededRng rng(0xB5297A4D2C4FB32BULL);
  Vector v(a.rows());
  for (Index i = 0; i < v.size(); ++i) v(i) = rng.gaussian();
  v.normalize();

  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    const Vector w = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <=
        rel_tol * std::max(std::abs(next),
                           std::numeric_limits<double>::min()))
      return next;
    lambda = next;
  }
  // tiny spectral gap; fall back to the dense solver
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("largest_eigenvalue: eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

}  // namespace detail

namespace {

struct CStep {
  Matrix c_next;
  double alpha = 0.0;
};

struct SStep {
  Matrix s_next;
  ApResult ap;
  double beta = 0.0;
};

bool has_regularization(const Vector& theta) {
  return theta.size() > 0 && theta.maxCoeff() > 0.0;
}

CStep c_step(const Matrix& y, const Matrix& c, const Matrix& c_prev,
             const Matrix& s, double mu1, double step_floor) {
  CStep step;
  const Matrix c_check = mu1 == 0.0 ? c : (c + mu1 * (c - c_prev)).eval();
  const Matrix s_gram = s * s.transpose();
  step.alpha =
      1.0 / std::max(detail::largest_eigenvalue(s_gram), step_floor);
  step.c_next =
      (c_check - step.alpha * (c_check * s_gram - y * s.transpose()))
          .cwiseMax(0.0);
  return step;
}

SStep s_step(const Matrix& y, const Matrix& c_next, const Matrix& s,
             const Matrix& s_prev, double mu2, Index image_rows,
             Index image_cols, const SolverConfig& config,
             const Vector& theta) {
  SStep step;
  const Matrix s_check = mu2 == 0.0 ? s : (s + mu2 * (s - s_prev)).eval();
  const Matrix c_gram = c_next.transpose() * c_next;
  double lipschitz = detail::largest_eigenvalue(c_gram);
  const bool regularized = has_regularization(theta);
  if (regularized)
    lipschitz += tv_lipschitz_term(s_check, image_rows, image_cols, theta,
                                   config.q, config.eps);
  step.beta = 1.0 / std::max(lipschitz, config.step_floor);

  Matrix grad = c_gram * s_check - c_next.transpose() * y;
  if (regularized)
    grad += tv_gradient(s_check, image_rows, image_cols, theta, config.q,
                        config.eps);
  const Matrix w0 = s_check - step.beta * grad;
  step.ap = project_feasible_set(w0, config.mode, image_rows, image_cols,
                                 config.ap_max_iters, config.ap_tol);
  step.s_next = std::move(step.ap.projected);
  step.ap.projected = Matrix();
  return step;
}

Vector resolve_theta(const Vector& theta, Index endmembers) {
  if (theta.size() == 0) return Vector::Zero(endmembers);
  if (theta.size() != endmembers)
    throw ShapeError("theta must have one weight per endmember");
  if (theta.minCoeff() < 0.0)
    throw InvalidDimsError("theta weights must be nonnegative");
  return theta;
}

}  // namespace

void SolverConfig::validate(Index endmembers) const {
  if (mode.is_exact_rank() ? mode.rank < 1 : mode.radius <= 0.0)
    throw InvalidDimsError("solver config: feasibility mode is not set");
  resolve_theta(theta, endmembers);
  if (q <= 0.0 || q > 1.0) throw InvalidDimsError("solver config: q in (0, 1]");
  if (eps <= 0.0) throw InvalidDimsError("solver config: eps > 0");
  if (max_iters < 1) throw InvalidDimsError("solver config: max_iters >= 1");
  if (obj_tol <= 0.0) throw InvalidDimsError("solver config: obj_tol > 0");
  if (ap_max_iters < 1)
    throw InvalidDimsError("solver config: ap_max_iters >= 1");
  if (ap_tol <= 0.0) throw InvalidDimsError("solver config: ap_tol > 0");
  if (step_floor <= 0.0)
    throw InvalidDimsError("solver config: step_floor > 0");
  if (energy_rank < 0)
    throw InvalidDimsError("solver config: energy_rank >= 0");
}

double ExtrapolationState::advance() {
  const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * gamma * gamma));
  const double mu = (gamma - 1.0) / next;
  gamma = next;
  return mu;
}

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::converged:
      return "converged";
    case TerminationReason::max_iterations:
      return "max_iterations";
    case TerminationReason::numerical_abort:
      return "numerical_abort";
  }
  return "unknown";
}

std::vector<double> RunTrace::running_min_iterate_delta() const {
  std::vector<double> out;
  out.reserve(records.size());
  double running = std::numeric_limits<double>::infinity();
  for (const auto& rec : records) {
    running = std::min(running, rec.delta_c + rec.delta_s);
    out.push_back(running);
  }
  return out;
}

Matrix grad_c(const Matrix& y, const Matrix& c, const Matrix& s) {
  if (y.rows() != c.rows() || c.cols() != s.rows() || y.cols() != s.cols())
    throw ShapeError("grad_c: factor shapes do not match the data");
  return c * (s * s.transpose()) - y * s.transpose();
}

Matrix grad_s(const Matrix& y, const Matrix& c, const Matrix& s,
              Index image_rows, Index image_cols, const Vector& theta,
              double q, double eps) {
  if (y.rows() != c.rows() || c.cols() != s.rows() || y.cols() != s.cols())
    throw ShapeError("grad_s: factor shapes do not match the data");
  const Vector weights = resolve_theta(theta, s.rows());
  Matrix grad = (c.transpose() * c) * s - c.transpose() * y;
  if (has_regularization(weights))
    grad += tv_gradient(s, image_rows, image_cols, weights, q, eps);
  return grad;
}

double step_size_c(const Matrix& s, double step_floor) {
  return 1.0 / std::max(detail::largest_eigenvalue(s * s.transpose()),
                        step_floor);
}

double step_size_s(const Matrix& c_next, const Matrix& s, Index image_rows,
                   Index image_cols, const Vector& theta, double q, double eps,
                   double step_floor) {
  const Vector weights = resolve_theta(theta, s.rows());
  double lipschitz =
      detail::largest_eigenvalue(c_next.transpose() * c_next);
  if (has_regularization(weights))
    lipschitz += tv_lipschitz_term(s, image_rows, image_cols, weights, q, eps);
  return 1.0 / std::max(lipschitz, step_floor);
}

Matrix update_c(const Matrix& y, const Matrix& c, const Matrix& c_prev,
                const Matrix& s, double mu1, double step_floor) {
  return c_step(y, c, c_prev, s, mu1, step_floor).c_next;
}

std::pair<Matrix, ApResult> update_s(const Matrix& y, const Matrix& c_next,
                                     const Matrix& s, const Matrix& s_prev,
                                     double mu2, Index image_rows,
                                     Index image_cols,
                                     const SolverConfig& config) {
  const Vector theta = resolve_theta(config.theta, s.rows());
  SStep step = s_step(y, c_next, s, s_prev, mu2, image_rows, image_cols,
                      config, theta);
  return {std::move(step.s_next), std::move(step.ap)};
}

RunResult run(const HsiCube& cube, const Matrix& c0, const Matrix& s0,
              const SolverConfig& config) {
  const Index image_rows = cube.image_rows();
  const Index image_cols = cube.image_cols();
  const Matrix& y = cube.matricized();
  if (c0.rows() != cube.bands())
    throw ShapeError("run: C0 must have one row per band");
  if (c0.cols() != s0.rows())
    throw ShapeError("run: C0/S0 inner dimensions differ");
  if (s0.cols() != cube.pixel_count())
    throw ShapeError("run: S0 must have one column per pixel");
  const Index endmembers = c0.cols();
  config.validate(endmembers);
  const Vector theta = resolve_theta(config.theta, endmembers);

  Index energy_rank = config.energy_rank;
  if (energy_rank == 0)
    energy_rank = config.mode.is_exact_rank()
                      ? config.mode.rank
                      : std::min(image_rows, image_cols);
  energy_rank = std::min(energy_rank, std::min(image_rows, image_cols));

  RunResult result;
  Matrix c = c0, c_prev = c0;
  Matrix s = s0, s_prev = s0;
  ExtrapolationState ext_c, ext_s;

  const double y_norm = y.norm();
  // objectives below this level are exact fits; keeps the relative-change
  // test meaningful when the residual sits at the rounding floor
  const double objective_floor =
      0.5 * std::pow(1e6 * std::numeric_limits<double>::epsilon() * y_norm, 2);
  double previous_objective = objective(y, c, s, image_rows, image_cols,
                                        theta, config.q, config.eps);
  result.trace.initial_objective = previous_objective;
  result.trace.reason = TerminationReason::max_iterations;
  result.trace.records.reserve(
      static_cast<std::size_t>(std::min(config.max_iters, 4096)));

  const auto start = std::chrono::steady_clock::now();
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const double mu1 = config.extrapolation ? ext_c.advance() : 0.0;
    CStep cs;
    SStep ss;
    try {
      cs = c_step(y, c, c_prev, s, mu1, config.step_floor);
      const double mu2 = config.extrapolation ? ext_s.advance() : 0.0;
      ss = s_step(y, cs.c_next, s, s_prev, mu2, image_rows, image_cols,
                  config, theta);
    } catch (const NumericalError&) {
      result.trace.reason = TerminationReason::numerical_abort;
      break;
    }

    c_prev = std::move(c);
    c = std::move(cs.c_next);
    s_prev = std::move(s);
    s = std::move(ss.s_next);

    const double data_term = 0.5 * (y - c * s).squaredNorm();
    double obj = data_term;
    for (Index r = 0; r < endmembers; ++r) {
      if (theta(r) == 0.0) continue;
      obj += theta(r) * phi_value(matricize_map(s, r, image_rows, image_cols),
                                  config.q, config.eps);
    }

    IterationRecord rec;
    rec.iter = iter;
    rec.time_s = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
    rec.objective = obj;
    rec.rel_fit = y_norm > 0.0 ? std::sqrt(2.0 * data_term) / y_norm : 0.0;
    rec.alpha = cs.alpha;
    rec.beta = ss.beta;
    rec.ap_iters = ss.ap.iterations;
    rec.sto_violation_max =
        (s.colwise().sum().array() - 1.0).abs().maxCoeff();
    rec.lr_energy_avg = lr_feasibility(s, image_rows, image_cols, energy_rank);
    rec.delta_c = (c - c_prev).norm();
    rec.delta_s = (s - s_prev).norm();
    result.trace.records.push_back(rec);

    if (!std::isfinite(obj)) {
      result.trace.reason = TerminationReason::numerical_abort;
      break;
    }
    const double rel_change = std::abs(previous_objective - obj) /
                              std::max(previous_objective, objective_floor);
    previous_objective = obj;
    if (rel_change < config.obj_tol) {
      result.trace.reason = TerminationReason::converged;
      break;
    }
  }

  result.endmembers = std::move(c);
  result.abundances = std::move(s);
  return result;
}

}  // namespace ll1
