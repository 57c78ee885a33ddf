#pragma once

#include <tuple>
#include <vector>

#include "switchid/convex.hpp"
#include "switchid/core.hpp"

// Per-sample mode assignment: exact enumeration, the simplex relaxation,
// the order-1 moment relaxation, plus the rounding and certification
// diagnostics attached to them.

namespace switchid {

/// Argmax of lambda, lowest index on ties.
int harden(const Vec& lambda);

/// Exact per-sample assignment: hardened = argmin_j of the l1 residual to
/// mode j (lowest index on ties), lambda the matching one-hot vector. This
/// is the exact combinatorial optimum and serves as the oracle for the
/// relaxations.
std::vector<ModeAssignment> assign_exact(const Dataset& dataset,
                                         const std::vector<ModeDynamics>& modes,
                                         const MonomialBasis& basis);

/// Simplex relaxation: per sample solves min_{lambda in simplex}
/// ||zdot - V lambda||_1 as a small LP. Stores the soft lambda and its
/// hardened index. Solver failures carry the sample index.
std::vector<ModeAssignment> assign_lp(const Dataset& dataset,
                                      const std::vector<ModeDynamics>& modes,
                                      const MonomialBasis& basis,
                                      double tol = kDefaultSolverTol);

/// Order-1 moment relaxation: per sample solves the bordered-moment-matrix
/// program (solve_shor_block). Stores lambda, the moment block, and the
/// hardened index. Blocks that stall below the requested duality gap are
/// retried at up to a hundredfold looser gap before failing.
std::vector<ModeAssignment> assign_sdp(const Dataset& dataset,
                                       const std::vector<ModeDynamics>& modes,
                                       const MonomialBasis& basis,
                                       double tol = kDefaultSolverTol);

struct RoundingBound {
  double lhs = 0.0;   // loss after rounding to the largest component
  double rhs = 0.0;   // soft loss plus the mixture-distance penalty
  bool holds = false;  // lhs <= rhs + 1e-9
};

/// Evaluates the rounding bound
///   ||zdot - v_{j*}||_1 <= ||zdot - V lambda||_1
///                          + sum_j lambda_j ||v_j - v_{j*}||_1,
/// with j* = harden(lambda).
RoundingBound rounding_bound_check(const Sample& sample,
                                   const std::vector<ModeDynamics>& modes,
                                   const MonomialBasis& basis,
                                   const Vec& lambda);

/// Fraction of assignments whose bordered moment matrix
/// [[1, lambda'], [lambda, Lambda]] is numerically rank 1: second-largest
/// eigenvalue <= rank_tol * largest. Throws if any moment block is missing.
double tightness_ratio(const std::vector<ModeAssignment>& assignments,
                       double rank_tol = 1e-6);

/// Sufficient dual certificate that the one-hot vector e_{j*} is the unique
/// optimum of the simplex relaxation at this sample: with
/// w_k = sign(zdot_k - v_{j*,k}) (zero on zero residuals), requires
/// <w, v_{j*}> > max_{j != j*} <w, v_j> + 1e-12. False is inconclusive.
bool verify_one_hot_certificate(const Sample& sample,
                                const std::vector<ModeDynamics>& modes,
                                const MonomialBasis& basis, int j_star);

}  // namespace switchid
