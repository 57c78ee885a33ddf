#include "switchid/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace switchid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kActiveWeight = 1e-9;

}  // namespace

FitResult fit_dynamics(const Dataset& dataset,
                       const std::vector<ModeAssignment>& assignments,
                       const MonomialBasis& basis, int mode_count, double eta,
                       const std::vector<ModeDynamics>* previous, double tol) {
  const int m = mode_count;
  const int n = dataset.n;
  const int p = basis.size();
  const int count = dataset.size();
  if (m < 1) throw std::invalid_argument("fit_dynamics: need mode_count >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("fit_dynamics: need eta > 0");
  if (static_cast<int>(assignments.size()) != count) {
    throw std::invalid_argument("fit_dynamics: one assignment per sample");
  }
  if (previous && static_cast<int>(previous->size()) != m) {
    throw std::invalid_argument("fit_dynamics: previous model size mismatch");
  }

  // Feature matrix and the modes that actually carry weight.
  Mat phi(p, count);
  for (int i = 0; i < count; ++i) {
    phi.col(i) = eval_basis(basis, dataset.samples[i].z);
  }
  Vec weight = Vec::Zero(m);
  for (int i = 0; i < count; ++i) {
    if (assignments[i].lambda.size() != m) {
      throw std::invalid_argument("fit_dynamics: lambda size != mode count");
    }
    weight += assignments[i].lambda;
  }
  std::vector<int> active;
  for (int j = 0; j < m; ++j) {
    if (weight(j) >= kActiveWeight) active.push_back(j);
  }
  const int n_active = static_cast<int>(active.size());

  FitResult result;
  result.modes.resize(m);
  for (int j = 0; j < m; ++j) {
    result.modes[j].coeffs =
        previous ? (*previous)[j].coeffs : Mat::Zero(n, p);
  }
  if (n_active > 0) {
    // One LP per output coordinate k. Variables: the k-th coefficient row of
    // every active mode (n_active * p), then one slack per sample.
    for (int k = 0; k < n; ++k) {
      const int n_coef = n_active * p;
      const int nvars = n_coef + count;
      LinearProgramSpec lp = LinearProgramSpec::make(nvars);
      for (int i = 0; i < count; ++i) lp.c(n_coef + i) = 1.0;
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(2 * static_cast<std::size_t>(count) * (n_coef + 1));
      for (int i = 0; i < count; ++i) {
        const Vec& lambda = assignments[i].lambda;
        for (int a = 0; a < n_active; ++a) {
          const double w = lambda(active[a]);
          if (w == 0.0) continue;
          for (int q = 0; q < p; ++q) {
            const double coeff = w * phi(q, i);
            trips.emplace_back(i, a * p + q, -coeff);
            trips.emplace_back(count + i, a * p + q, coeff);
          }
        }
        trips.emplace_back(i, n_coef + i, -1.0);
        trips.emplace_back(count + i, n_coef + i, -1.0);
      }
      lp.a_ub.resize(2 * count, nvars);
      lp.a_ub.setFromTriplets(trips.begin(), trips.end());
      lp.b_ub.resize(2 * count);
      for (int i = 0; i < count; ++i) {
        lp.b_ub(i) = -dataset.samples[i].zdot(k);
        lp.b_ub(count + i) = dataset.samples[i].zdot(k);
      }
      for (int v = 0; v < n_coef; ++v) lp.bounds[v] = {-eta, eta};
      for (int i = 0; i < count; ++i) lp.bounds[n_coef + i] = {0.0, kInf};

      const SolveStatus status = solve_lp(lp, tol);
      if (status.status != SolveOutcome::kOptimal) {
        throw SolverError("fit_dynamics: solve failed on coordinate " +
                          std::to_string(k));
      }
      for (int a = 0; a < n_active; ++a) {
        for (int q = 0; q < p; ++q) {
          result.modes[active[a]].coeffs(k, q) =
              std::clamp(status.primal(a * p + q), -eta, eta);
        }
      }
    }
  }

  // Realized objective at the returned coefficients.
  double objective = 0.0;
  for (int i = 0; i < count; ++i) {
    Vec residual = dataset.samples[i].zdot;
    for (int j = 0; j < m; ++j) {
      const double w = assignments[i].lambda(j);
      if (w == 0.0) continue;
      residual.noalias() -= w * (result.modes[j].coeffs * phi.col(i));
    }
    objective += residual.lpNorm<1>();
  }
  result.objective = objective;
  return result;
}

}  // namespace switchid
