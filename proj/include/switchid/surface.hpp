#pragma once

#include <vector>

#include "switchid/convex.hpp"
#include "switchid/core.hpp"

// Switching-surface recovery from labeled states: sign-code books, the
// soft-margin polynomial classification program, the margin-certificate
// program, and the admissible-margin interval.

namespace switchid {

struct SurfaceFitConfig {
  int degree = 2;
  double margin = 1e-2;    // required signed value of every point (epsilon)
  double sparsity = 1e-2;  // l1 penalty weight on the coefficients (beta)
  double bound = 10.0;     // coefficient box half-width (eta)
};

/// Sign codes over L = ceil(log2(max(M, 2))) surfaces: the code of mode j
/// (0-based) is the L-bit binary expansion of j, most significant bit
/// first, with bit 0 -> +1 and bit 1 -> -1.
ModeBook make_modebook(int mode_count);

struct SurfaceFitResult {
  /// Fitted coefficient vectors, unnormalized (see SurfaceSet::normalized
  /// for scale-free reporting).
  SurfaceSet surfaces;
  /// Realized total hinge slack sum_{i,l} max(0, margin - sigma_il a_l'phi_i).
  double total_slack = 0.0;
  /// Per-surface l1 norm of the fitted coefficients.
  std::vector<double> l1_norms;
  /// Realized objective: total_slack + sparsity * sum(l1_norms).
  double objective = 0.0;
};

/// Fits every surface independently (the program decouples across them) by
///   min sum_i xi_il + beta sum_m zeta_lm
///   s.t. sigma_il a_l'phi(z_i) >= eps - xi_il, xi >= 0,
///        zeta_lm >= |a_lm|, -eta <= a_lm <= eta,
/// where sigma_il is the modebook code of the label of z_i. Labels are
/// 0-based mode indices into the modebook.
SurfaceFitResult fit_surfaces(const std::vector<Vec>& states,
                              const std::vector<int>& labels,
                              const ModeBook& modebook,
                              const SurfaceFitConfig& config,
                              double tol = kDefaultSolverTol);

struct MarginCertificate {
  /// Best achievable margin within the coefficient box; > 0 exactly when
  /// the labeled points are strictly polynomially separable at this degree.
  double t = 0.0;
  /// A maximizing coefficient vector.
  Vec witness;
};

/// Per-surface margin certificate: max t s.t. sigma_il a'phi(z_i) >= t,
/// |a_m| <= eta. A nonpositive t signals inseparability; it is not an
/// error.
std::vector<MarginCertificate> margin_certificate(
    const std::vector<Vec>& states, const std::vector<int>& labels,
    const ModeBook& modebook, int degree, double eta,
    double tol = kDefaultSolverTol);

struct EpsilonInterval {
  double lo = 0.0;  // exclusive
  double hi = 0.0;  // inclusive
  bool empty = false;
};

/// Margins guaranteed to yield a zero-slack, nonzero-coefficient optimum on
/// certificate-separable data: (beta*S/(N*L), t], where S is the total l1
/// norm of the certificate witnesses over N points and L surfaces. Empty
/// when beta*S >= N*L*t (in particular whenever t <= 0).
EpsilonInterval admissible_epsilon(double t, double beta, double s,
                                   int point_count, int surface_count);

}  // namespace switchid
