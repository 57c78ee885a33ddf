#include "switchid/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace switchid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Feature matrix (basis values per point) with label validation.
Mat feature_matrix(const std::vector<Vec>& states,
                   const std::vector<int>& labels, const ModeBook& modebook,
                   const MonomialBasis& basis, const char* where) {
  const int count = static_cast<int>(states.size());
  if (count == 0) {
    throw std::invalid_argument(std::string(where) + ": need at least one state");
  }
  if (static_cast<int>(labels.size()) != count) {
    throw std::invalid_argument(std::string(where) + ": one label per state");
  }
  if (modebook.mode_count() == 0 || modebook.surface_count() == 0) {
    throw std::invalid_argument(std::string(where) + ": empty modebook");
  }
  Mat phi(basis.size(), count);
  for (int i = 0; i < count; ++i) {
    if (states[i].size() != basis.n) {
      throw std::invalid_argument(std::string(where) +
                                  ": state dimension mismatch");
    }
    if (labels[i] < 0 || labels[i] >= modebook.mode_count()) {
      throw std::invalid_argument(std::string(where) + ": label out of range");
    }
    phi.col(i) = eval_basis(basis, states[i]);
  }
  return phi;
}

}  // namespace

ModeBook make_modebook(int mode_count) {
  if (mode_count < 1) {
    throw std::invalid_argument("make_modebook: need mode_count >= 1");
  }
  int l = 1;
  while ((std::int64_t{1} << l) < mode_count) ++l;
  ModeBook book;
  book.codes.resize(mode_count);
  for (int j = 0; j < mode_count; ++j) {
    book.codes[j].resize(l);
    for (int b = 0; b < l; ++b) {
      const int bit = (j >> (l - 1 - b)) & 1;
      book.codes[j][b] = bit == 0 ? 1 : -1;
    }
  }
  return book;
}

SurfaceFitResult fit_surfaces(const std::vector<Vec>& states,
                              const std::vector<int>& labels,
                              const ModeBook& modebook,
                              const SurfaceFitConfig& config, double tol) {
  if (config.degree < 0) {
    throw std::invalid_argument("fit_surfaces: need degree >= 0");
  }
  if (!(config.margin > 0.0)) {
    throw std::invalid_argument("fit_surfaces: need margin > 0");
  }
  if (config.sparsity < 0.0) {
    throw std::invalid_argument("fit_surfaces: need sparsity >= 0");
  }
  if (!(config.bound > 0.0)) {
    throw std::invalid_argument("fit_surfaces: need bound > 0");
  }
  const int n = states.empty() ? 0 : static_cast<int>(states.front().size());
  const MonomialBasis basis = MonomialBasis::create(n, config.degree);
  const Mat phi = feature_matrix(states, labels, modebook, basis,
                                 "fit_surfaces");
  const int count = static_cast<int>(states.size());
  const int l_count = modebook.surface_count();
  const int p = basis.size();

  SurfaceFitResult result;
  result.surfaces.basis = basis;
  result.surfaces.surfaces.resize(l_count);
  result.l1_norms.assign(l_count, 0.0);

  // The zeta variables only exist when the l1 term is active; with a zero
  // weight they would leave the optimal face unbounded.
  const int n_zeta = config.sparsity > 0.0 ? p : 0;
  for (int l = 0; l < l_count; ++l) {
    // Variables: a (p), xi (count), zeta (n_zeta).
    const int nvars = p + count + n_zeta;
    LinearProgramSpec lp = LinearProgramSpec::make(nvars);
    for (int i = 0; i < count; ++i) lp.c(p + i) = 1.0;
    for (int m = 0; m < n_zeta; ++m) lp.c(p + count + m) = config.sparsity;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(count) * (p + 1) + 4 * n_zeta);
    for (int i = 0; i < count; ++i) {
      const double sign = modebook.codes[labels[i]][l];
      for (int q = 0; q < p; ++q) trips.emplace_back(i, q, -sign * phi(q, i));
      trips.emplace_back(i, p + i, -1.0);
    }
    for (int m = 0; m < n_zeta; ++m) {
      trips.emplace_back(count + 2 * m, m, 1.0);
      trips.emplace_back(count + 2 * m, p + count + m, -1.0);
      trips.emplace_back(count + 2 * m + 1, m, -1.0);
      trips.emplace_back(count + 2 * m + 1, p + count + m, -1.0);
    }
    const int nrows = count + 2 * n_zeta;
    lp.a_ub.resize(nrows, nvars);
    lp.a_ub.setFromTriplets(trips.begin(), trips.end());
    lp.b_ub = Vec::Zero(nrows);
    for (int i = 0; i < count; ++i) lp.b_ub(i) = -config.margin;
    for (int q = 0; q < p; ++q) lp.bounds[q] = {-config.bound, config.bound};
    for (int v = p; v < nvars; ++v) lp.bounds[v] = {0.0, kInf};

    const SolveStatus status = solve_lp(lp, tol);
    if (status.status != SolveOutcome::kOptimal) {
      throw SolverError("fit_surfaces: solve failed on surface " +
                        std::to_string(l));
    }
    Vec a = status.primal.head(p);
    for (int q = 0; q < p; ++q) {
      a(q) = std::clamp(a(q), -config.bound, config.bound);
    }
    result.surfaces.surfaces[l] = a;
    result.l1_norms[l] = a.lpNorm<1>();
  }

  // Realized slack and objective at the returned coefficients.
  double slack = 0.0;
  for (int l = 0; l < l_count; ++l) {
    for (int i = 0; i < count; ++i) {
      const double sign = modebook.codes[labels[i]][l];
      const double value = sign * result.surfaces.surfaces[l].dot(phi.col(i));
      slack += std::max(0.0, config.margin - value);
    }
  }
  result.total_slack = slack;
  result.objective =
      slack + config.sparsity *
                  std::accumulate(result.l1_norms.begin(),
                                  result.l1_norms.end(), 0.0);
  return result;
}

std::vector<MarginCertificate> margin_certificate(
    const std::vector<Vec>& states, const std::vector<int>& labels,
    const ModeBook& modebook, int degree, double eta, double tol) {
  if (degree < 0) {
    throw std::invalid_argument("margin_certificate: need degree >= 0");
  }
  if (!(eta > 0.0)) {
    throw std::invalid_argument("margin_certificate: need eta > 0");
  }
  const int n = states.empty() ? 0 : static_cast<int>(states.front().size());
  const MonomialBasis basis = MonomialBasis::create(n, degree);
  const Mat phi = feature_matrix(states, labels, modebook, basis,
                                 "margin_certificate");
  const int count = static_cast<int>(states.size());
  const int l_count = modebook.surface_count();
  const int p = basis.size();

  std::vector<MarginCertificate> certificates(l_count);
  for (int l = 0; l < l_count; ++l) {
    // Variables: a (p), then the margin t.
    const int nvars = p + 1;
    LinearProgramSpec lp = LinearProgramSpec::make(nvars);
    lp.c(p) = -1.0;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(count) * (p + 1));
    for (int i = 0; i < count; ++i) {
      const double sign = modebook.codes[labels[i]][l];
      for (int q = 0; q < p; ++q) trips.emplace_back(i, q, -sign * phi(q, i));
      trips.emplace_back(i, p, 1.0);
    }
    lp.a_ub.resize(count, nvars);
    lp.a_ub.setFromTriplets(trips.begin(), trips.end());
    lp.b_ub = Vec::Zero(count);
    for (int q = 0; q < p; ++q) lp.bounds[q] = {-eta, eta};

    const SolveStatus status = solve_lp(lp, tol);
    if (status.status != SolveOutcome::kOptimal) {
      throw SolverError("margin_certificate: solve failed on surface " +
                        std::to_string(l));
    }
    Vec a = status.primal.head(p);
    for (int q = 0; q < p; ++q) a(q) = std::clamp(a(q), -eta, eta);
    // Realized margin of the witness, so t never overstates separability.
    double t = kInf;
    for (int i = 0; i < count; ++i) {
      const double sign = modebook.codes[labels[i]][l];
      t = std::min(t, sign * a.dot(phi.col(i)));
    }
    certificates[l].t = t;
    certificates[l].witness = a;
  }
  return certificates;
}

EpsilonInterval admissible_epsilon(double t, double beta, double s,
                                   int point_count, int surface_count) {
  if (point_count < 1 || surface_count < 1) {
    throw std::invalid_argument("admissible_epsilon: need positive counts");
  }
  if (beta < 0.0 || s < 0.0) {
    throw std::invalid_argument(
        "admissible_epsilon: need beta >= 0 and s >= 0");
  }
  EpsilonInterval interval;
  interval.lo =
      beta * s / (static_cast<double>(point_count) * surface_count);
  interval.hi = t;
  interval.empty = !(interval.lo < t);
  return interval;
}

}  // namespace switchid
