#pragma once

#include "ll1/projections.hpp"
#include "ll1/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ll1 {

struct SolverConfig {
  FeasibilityMode mode;
  Vector theta;               // size R, or empty for all-zero
  double q = 0.5;
  double eps = 1e-3;
  int max_iters = 1200;
  double obj_tol = 1e-5;      // relative objective change
  int ap_max_iters = 50;
  double ap_tol = 1e-3;
  bool extrapolation = true;
  double step_floor = 1e-12;  // guards 1/L when an iterate collapses
  Index energy_rank = 0;      // L for the trace's top-L energy column; 0 picks
                              // mode.rank (exact_rank) or min(I, J)
  std::uint64_t seed = 0;     // echoed into manifests; run() is deterministic

  void validate(Index endmembers) const;
};

// gamma(0) = 1, gamma(t+1) = (1 + sqrt(1 + 4 gamma(t)^2)) / 2,
// mu(t) = (gamma(t) - 1) / gamma(t+1). First advance() returns 0.
struct ExtrapolationState {
  double gamma = 1.0;

  double advance();
};

enum class TerminationReason { converged, max_iterations, numerical_abort };

const char* to_string(TerminationReason reason);

struct IterationRecord {
  int iter = 0;
  double time_s = 0.0;
  double objective = 0.0;
  double rel_fit = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  int ap_iters = 0;
  double sto_violation_max = 0.0;
  double lr_energy_avg = 0.0;
  double delta_c = 0.0;
  double delta_s = 0.0;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  TerminationReason reason = TerminationReason::max_iterations;
  double initial_objective = 0.0;

  // Running minimum of delta_c + delta_s, the stationarity proxy whose decay
  // the trace exists to expose.
  std::vector<double> running_min_iterate_delta() const;
};

struct RunResult {
  Matrix endmembers;
  Matrix abundances;
  RunTrace trace;
};

// Gradient of the data term in C: C*(S*S') - Y*S'.
Matrix grad_c(const Matrix& y, const Matrix& c, const Matrix& s);

// Gradient of the full objective in S: (C'C)*S - C'*Y + TV rows.
Matrix grad_s(const Matrix& y, const Matrix& c, const Matrix& s,
              Index image_rows, Index image_cols, const Vector& theta,
              double q, double eps);

// 1 / max(sigma_max(S)^2, step_floor), sigma_max by power iteration on the
// R x R Gram matrix.
double step_size_c(const Matrix& s, double step_floor = 1e-12);

// 1 / max(sigma_max(C)^2 + tv_lipschitz_term(S), step_floor).
double step_size_s(const Matrix& c_next, const Matrix& s, Index image_rows,
                   Index image_cols, const Vector& theta, double q, double eps,
                   double step_floor = 1e-12);

// One extrapolated gradient-projection step on C: forms the extrapolated
// point from (c, c_prev, mu1), steps with alpha = step_size_c(s), and clips
// to the nonnegative orthant.
Matrix update_c(const Matrix& y, const Matrix& c, const Matrix& c_prev,
                const Matrix& s, double mu1, double step_floor = 1e-12);

// One extrapolated gradient-projection step on S, ending in the alternating
// feasibility projection. The step size and majorizer weights are evaluated
// at the extrapolated point.
std::pair<Matrix, ApResult> update_s(const Matrix& y, const Matrix& c_next,
                                     const Matrix& s, const Matrix& s_prev,
                                     double mu2, Index image_rows,
                                     Index image_cols,
                                     const SolverConfig& config);

// Full alternating loop: C-step then S-step with per-block extrapolation
// states, one trace record per outer iteration. Stops when the relative
// objective change drops below obj_tol or at max_iters; a non-finite
// objective aborts with the partial trace attached. The returned factors are
// the last projected iterates, never extrapolated points.
RunResult run(const HsiCube& cube, const Matrix& c0, const Matrix& s0,
              const SolverConfig& config);

namespace detail {

// Largest eigenvalue of a symmetric PSD matrix by power iteration with a
// dense-eigensolver fallback.
double largest_eigenvalue(const Matrix& a, double rel_tol = 1e-6);

}  // namespace detail

}  // namespace ll1
