#pragma once

#include <Eigen/Sparse>

#include <utility>
#include <vector>

#include "switchid/core.hpp"

// Uniform solver interface for the linear programs and per-sample
// semidefinite blocks the identification pipeline reduces to.

namespace switchid {

using SpMat = Eigen::SparseMatrix<double>;

/// Default interior-point tolerance, tight enough for the rank tests
/// downstream diagnostics run on the moment blocks.
constexpr double kDefaultSolverTol = 1e-8;

enum class SolveOutcome {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
};

/// Canonical linear program:
///   minimize c'x  subject to  a_ub x <= b_ub, a_eq x = b_eq,
///   bounds[i].first <= x_i <= bounds[i].second.
/// An empty bounds vector leaves every variable free; infinite bounds are
/// allowed entrywise.
struct LinearProgramSpec {
  Vec c;
  SpMat a_ub;
  Vec b_ub;
  SpMat a_eq;
  Vec b_eq;
  std::vector<std::pair<double, double>> bounds;

  /// Spec with nvars variables, zero objective, no constraints, free bounds.
  static LinearProgramSpec make(int nvars);
};

struct SolveStatus {
  SolveOutcome status = SolveOutcome::kIterationLimit;
  double objective = 0.0;
  Vec primal;  // present iff status == kOptimal
  int iterations = 0;
  double wall_time_seconds = 0.0;
};

/// One per-sample mode-assignment block: columns of `v` are the mode
/// velocity predictions v_j = C_j phi(z), `zdot` the measured derivative.
struct ShorBlockSpec {
  int mode_count = 0;
  Mat v;  // n x mode_count
  Vec zdot;
};

struct ShorBlockSolution {
  SolveStatus status;
  Vec lambda;        // simplex point, length M
  Mat moment_block;  // Lambda, M x M
};

/// Solves the LP to the given duality-gap tolerance. Infeasibility and
/// unboundedness are reported through the status, never as exceptions.
SolveStatus solve_lp(const LinearProgramSpec& lp,
                     double tol = kDefaultSolverTol);

/// Order-1 moment relaxation of the per-sample assignment problem:
///   minimize sum(delta)  over (lambda, Lambda, delta)
///   s.t. -delta <= zdot - V lambda <= delta, delta >= 0,
///        [[1, lambda'], [lambda, Lambda]] PSD, diag(Lambda) = lambda,
///        sum(lambda) = 1.
ShorBlockSolution solve_shor_block(const ShorBlockSpec& block,
                                   double tol = kDefaultSolverTol);

}  // namespace switchid
