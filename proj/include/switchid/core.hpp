#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace switchid {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when a requested object exceeds what the implementation can
/// represent (basis too large, too many modes for exhaustive alignment, ...).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an optimization subproblem fails where a solution is required.
/// `context` identifies the failing unit (sample index, iteration, ...).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Tolerance for simplex membership checks on mode-indicator vectors.
inline constexpr double kSimplexTol = 1e-8;

/// Number of monomials in n variables of total degree <= d, i.e.
/// binomial(n + d, d). Throws CapacityError if the count overflows 64 bits.
std::uint64_t basis_size(int n, int d);

/// Monomial basis in n variables up to total degree d, ordered graded
/// lexicographically: ascending total degree, and within a degree the
/// exponent tuples in descending lexicographic order. The constant monomial
/// is always first, so for n = 2, d = 2 the order is 1, x, y, x^2, xy, y^2.
struct MonomialBasis {
  int n = 0;
  int d = 0;
  std::vector<std::vector<int>> exponents;

  static MonomialBasis create(int n, int d);

  int size() const { return static_cast<int>(exponents.size()); }

  /// Index of the degree-1 monomial z_k, or -1 when d == 0.
  int linear_index(int k) const;
};

/// Evaluates every basis monomial at z. Returns a vector of length size().
Vec eval_basis(const MonomialBasis& basis, const Vec& z);

/// One mode's vector field: zdot = coeffs * phi(z), coeffs is n x P.
struct ModeDynamics {
  Mat coeffs;
};

/// Evaluates a mode's vector field at z.
Vec eval_mode(const ModeDynamics& mode, const MonomialBasis& basis,
              const Vec& z);

/// Polynomial switching surfaces sharing one basis; `surfaces[l]` holds the
/// coefficient vector of surface l.
struct SurfaceSet {
  MonomialBasis basis;
  std::vector<Vec> surfaces;

  int count() const { return static_cast<int>(surfaces.size()); }

  /// Evaluates every surface polynomial at z.
  Vec values(const Vec& z) const;

  /// Copy with each coefficient vector divided by its largest-magnitude
  /// entry (a positive scale, so region classification is unchanged).
  SurfaceSet normalized() const;
};

/// Sign codes identifying each mode's region: codes[j] in {-1,+1}^L.
struct ModeBook {
  std::vector<std::vector<int>> codes;

  int mode_count() const { return static_cast<int>(codes.size()); }
  int surface_count() const {
    return codes.empty() ? 0 : static_cast<int>(codes.front().size());
  }
};

/// A switching system: M modes over a shared monomial basis, plus (optionally)
/// the switching surfaces and sign codes that decide the active mode.
struct SwitchingSystemModel {
  MonomialBasis basis;
  std::vector<ModeDynamics> modes;
  std::optional<SurfaceSet> surfaces;
  std::optional<ModeBook> modebook;

  int mode_count() const { return static_cast<int>(modes.size()); }
  int state_dim() const { return basis.n; }
};

/// One observation: a state and its time derivative. `true_mode` is the
/// generating mode when known (0-based), or nullopt for unlabeled data.
struct Sample {
  Vec z;
  Vec zdot;
  std::optional<int> true_mode;
};

struct Dataset {
  int n = 0;
  std::vector<Sample> samples;
  std::uint64_t seed = 0;
  std::string generator;

  int size() const { return static_cast<int>(samples.size()); }
  bool fully_labeled() const;
};

/// Per-sample mode indicator. `lambda` lives on the simplex; `moment_block`
/// is the second-order moment matrix when the assignment came from the
/// semidefinite relaxation; `hardened` is the argmax index (0-based).
struct ModeAssignment {
  Vec lambda;
  std::optional<Mat> moment_block;
  int hardened = 0;
};

/// Residual zdot - sum_j lambda_j * C_j phi(z) and its l1 norm.
/// Requires lambda on the simplex within kSimplexTol.
std::pair<Vec, double> residual_l1(const Sample& sample,
                                   const std::vector<ModeDynamics>& modes,
                                   const MonomialBasis& basis,
                                   const Vec& lambda);

/// Active mode (0-based) at state z: computes the sign pattern of the
/// surface values (sign(0) := +1) and returns the mode whose code matches.
/// When no code matches exactly, returns the mode with minimum Hamming
/// distance, lowest index on ties.
int region_mode(const SurfaceSet& surfaces, const ModeBook& modebook,
                const Vec& z);

}  // namespace switchid
