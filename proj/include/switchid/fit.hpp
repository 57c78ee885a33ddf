#pragma once

#include <vector>

#include "switchid/convex.hpp"
#include "switchid/core.hpp"

// Dynamics estimation: given per-sample mode indicators, fit every mode's
// coefficient matrix by l1 regression with a coefficient box.

namespace switchid {

struct FitResult {
  std::vector<ModeDynamics> modes;
  /// sum_i ||zdot_i - sum_j lambda_ij C_j phi(z_i)||_1 at the returned C.
  double objective = 0.0;
};

/// Solves  min_C sum_i ||zdot_i - sum_j lambda_ij C_j phi(z_i)||_1  subject
/// to every coefficient lying in [-eta, eta], decomposed into one LP per
/// output coordinate (row k of every C_j touches only residual component k).
/// Modes whose total assigned weight sum_i lambda_ij is below 1e-9 are left
/// out of the program and keep their `previous` coefficients (zero if no
/// previous model is given).
FitResult fit_dynamics(const Dataset& dataset,
                       const std::vector<ModeAssignment>& assignments,
                       const MonomialBasis& basis, int mode_count, double eta,
                       const std::vector<ModeDynamics>* previous = nullptr,
                       double tol = kDefaultSolverTol);

}  // namespace switchid
