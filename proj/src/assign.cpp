#include "switchid/assign.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace switchid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Mode velocity predictions at one state: column j is C_j phi(z).
Mat mode_velocities(const std::vector<ModeDynamics>& modes,
                    const MonomialBasis& basis, const Vec& z) {
  const Vec phi = eval_basis(basis, z);
  Mat v(basis.n, static_cast<int>(modes.size()));
  for (int j = 0; j < static_cast<int>(modes.size()); ++j) {
    v.col(j) = modes[j].coeffs * phi;
  }
  return v;
}

void require_modes(const std::vector<ModeDynamics>& modes) {
  if (modes.empty()) throw std::invalid_argument("assignment needs modes");
}

}  // namespace

int harden(const Vec& lambda) {
  int best = 0;
  for (int j = 1; j < lambda.size(); ++j) {
    if (lambda(j) > lambda(best)) best = j;
  }
  return best;
}

std::vector<ModeAssignment> assign_exact(
    const Dataset& dataset, const std::vector<ModeDynamics>& modes,
    const MonomialBasis& basis) {
  require_modes(modes);
  const int m = static_cast<int>(modes.size());
  std::vector<ModeAssignment> out;
  out.reserve(dataset.samples.size());
  for (const Sample& sample : dataset.samples) {
    const Mat v = mode_velocities(modes, basis, sample.z);
    int best = 0;
    double best_cost = kInf;
    for (int j = 0; j < m; ++j) {
      const double cost = (sample.zdot - v.col(j)).lpNorm<1>();
      if (cost < best_cost) {
        best_cost = cost;
        best = j;
      }
    }
    ModeAssignment assignment;
    assignment.lambda = Vec::Zero(m);
    assignment.lambda(best) = 1.0;
    assignment.hardened = best;
    out.push_back(std::move(assignment));
  }
  return out;
}

std::vector<ModeAssignment> assign_lp(const Dataset& dataset,
                                      const std::vector<ModeDynamics>& modes,
                                      const MonomialBasis& basis, double tol) {
  require_modes(modes);
  const int m = static_cast<int>(modes.size());
  const int n = dataset.n;
  std::vector<ModeAssignment> out;
  out.reserve(dataset.samples.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& sample = dataset.samples[i];
    const Mat v = mode_velocities(modes, basis, sample.z);

    // Variables (lambda, delta): min sum(delta)
    // s.t. -delta <= zdot - V lambda <= delta, lambda in simplex.
    LinearProgramSpec lp = LinearProgramSpec::make(m + n);
    for (int k = 0; k < n; ++k) lp.c(m + k) = 1.0;
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < m; ++j) {
        trips.emplace_back(k, j, -v(k, j));
        trips.emplace_back(n + k, j, v(k, j));
      }
      trips.emplace_back(k, m + k, -1.0);
      trips.emplace_back(n + k, m + k, -1.0);
    }
    lp.a_ub.resize(2 * n, m + n);
    lp.a_ub.setFromTriplets(trips.begin(), trips.end());
    lp.b_ub.resize(2 * n);
    lp.b_ub.head(n) = -sample.zdot;
    lp.b_ub.tail(n) = sample.zdot;
    std::vector<Eigen::Triplet<double>> eq;
    for (int j = 0; j < m; ++j) eq.emplace_back(0, j, 1.0);
    lp.a_eq.resize(1, m + n);
    lp.a_eq.setFromTriplets(eq.begin(), eq.end());
    lp.b_eq = Vec::Ones(1);
    for (int j = 0; j < m; ++j) lp.bounds[j] = {0.0, 1.0};
    for (int k = 0; k < n; ++k) lp.bounds[m + k] = {0.0, kInf};

    const SolveStatus status = solve_lp(lp, tol);
    if (status.status != SolveOutcome::kOptimal) {
      throw SolverError("assign_lp: solve failed at sample " +
                        std::to_string(i));
    }
    ModeAssignment assignment;
    assignment.lambda = status.primal.head(m).cwiseMax(0.0);
    assignment.lambda /= assignment.lambda.sum();
    assignment.hardened = harden(assignment.lambda);
    out.push_back(std::move(assignment));
  }
  return out;
}

std::vector<ModeAssignment> assign_sdp(const Dataset& dataset,
                                       const std::vector<ModeDynamics>& modes,
                                       const MonomialBasis& basis, double tol) {
  require_modes(modes);
  const int m = static_cast<int>(modes.size());
  std::vector<ModeAssignment> out;
  out.reserve(dataset.samples.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& sample = dataset.samples[i];
    ShorBlockSpec block;
    block.mode_count = m;
    block.v = mode_velocities(modes, basis, sample.z);
    block.zdot = sample.zdot;
    ShorBlockSolution sol = solve_shor_block(block, tol);
    // Degenerate blocks whose optimal value sits at the gap scale can stall
    // the barrier; a tenfold looser gap still lands far inside every
    // downstream tolerance, so retry twice before giving up.
    for (int retry = 1;
         retry <= 2 && sol.status.status == SolveOutcome::kIterationLimit;
         ++retry) {
      sol = solve_shor_block(block, tol * std::pow(10.0, retry));
    }
    if (sol.status.status != SolveOutcome::kOptimal) {
      throw SolverError("assign_sdp: solve failed at sample " +
                        std::to_string(i));
    }
    ModeAssignment assignment;
    assignment.lambda = sol.lambda.cwiseMax(0.0);
    assignment.lambda /= assignment.lambda.sum();
    assignment.moment_block = sol.moment_block;
    assignment.hardened = harden(assignment.lambda);
    out.push_back(std::move(assignment));
  }
  return out;
}

RoundingBound rounding_bound_check(const Sample& sample,
                                   const std::vector<ModeDynamics>& modes,
                                   const MonomialBasis& basis,
                                   const Vec& lambda) {
  const Mat v = mode_velocities(modes, basis, sample.z);
  const int j_star = harden(lambda);
  RoundingBound bound;
  bound.lhs = (sample.zdot - v.col(j_star)).lpNorm<1>();
  bound.rhs = (sample.zdot - v * lambda).lpNorm<1>();
  for (int j = 0; j < v.cols(); ++j) {
    bound.rhs += lambda(j) * (v.col(j) - v.col(j_star)).lpNorm<1>();
  }
  bound.holds = bound.lhs <= bound.rhs + 1e-9;
  return bound;
}

double tightness_ratio(const std::vector<ModeAssignment>& assignments,
                       double rank_tol) {
  if (assignments.empty()) {
    throw std::invalid_argument("tightness_ratio: no assignments");
  }
  int tight = 0;
  for (const ModeAssignment& assignment : assignments) {
    if (!assignment.moment_block.has_value()) {
      throw std::invalid_argument(
          "tightness_ratio: assignment lacks a moment block");
    }
    const int m = static_cast<int>(assignment.lambda.size());
    Mat bordered(m + 1, m + 1);
    bordered(0, 0) = 1.0;
    bordered.block(0, 1, 1, m) = assignment.lambda.transpose();
    bordered.block(1, 0, m, 1) = assignment.lambda;
    bordered.block(1, 1, m, m) = *assignment.moment_block;
    Eigen::SelfAdjointEigenSolver<Mat> eig(bordered);
    const Vec values = eig.eigenvalues();  // ascending
    if (values(m - 1) <= rank_tol * values(m)) ++tight;
  }
  return static_cast<double>(tight) / assignments.size();
}

bool verify_one_hot_certificate(const Sample& sample,
                                const std::vector<ModeDynamics>& modes,
                                const MonomialBasis& basis, int j_star) {
  const int m = static_cast<int>(modes.size());
  if (j_star < 0 || j_star >= m) {
    throw std::invalid_argument("verify_one_hot_certificate: bad mode index");
  }
  if (m == 1) return true;  // the empty competitor max certifies vacuously
  const Mat v = mode_velocities(modes, basis, sample.z);
  const Vec residual = sample.zdot - v.col(j_star);
  Vec w(residual.size());
  for (int k = 0; k < residual.size(); ++k) {
    w(k) = residual(k) > 0.0 ? 1.0 : (residual(k) < 0.0 ? -1.0 : 0.0);
  }
  const double own = w.dot(v.col(j_star));
  double best_other = -kInf;
  for (int j = 0; j < m; ++j) {
    if (j == j_star) continue;
    best_other = std::max(best_other, w.dot(v.col(j)));
  }
  return own > best_other + 1e-12;
}

}  // namespace switchid
