#include "switchid/convex.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "conelp.hpp"

namespace switchid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SolveOutcome map_status(conelp::Status status) {
  switch (status) {
    case conelp::Status::kOptimal:
      return SolveOutcome::kOptimal;
    case conelp::Status::kPrimalInfeasible:
      return SolveOutcome::kInfeasible;
    case conelp::Status::kDualInfeasible:
      return SolveOutcome::kUnbounded;
    case conelp::Status::kIterationLimit:
      break;
  }
  return SolveOutcome::kIterationLimit;
}

SolveStatus run_solver(const conelp::Problem& problem, double tol) {
  const auto start = std::chrono::steady_clock::now();
  const conelp::Solution raw = conelp::solve(problem, tol);
  const auto stop = std::chrono::steady_clock::now();

  SolveStatus out;
  out.status = map_status(raw.status);
  out.iterations = raw.iterations;
  out.wall_time_seconds = std::chrono::duration<double>(stop - start).count();
  if (out.status == SolveOutcome::kOptimal) {
    out.objective = raw.primal_objective;
    out.primal = raw.x;
  }
  return out;
}

/// Index of entry (i, j), i >= j, in the column-major packed lower triangle
/// of a q x q symmetric matrix.
int packed_index(int i, int j, int q) {
  int idx = 0;
  for (int col = 0; col < j; ++col) idx += q - col;
  return idx + (i - j);
}

}  // namespace

LinearProgramSpec LinearProgramSpec::make(int nvars) {
  LinearProgramSpec lp;
  lp.c = Vec::Zero(nvars);
  lp.a_ub.resize(0, nvars);
  lp.b_ub.resize(0);
  lp.a_eq.resize(0, nvars);
  lp.b_eq.resize(0);
  lp.bounds.assign(nvars, {-kInf, kInf});
  return lp;
}

SolveStatus solve_lp(const LinearProgramSpec& lp, double tol) {
  const int nvars = static_cast<int>(lp.c.size());
  if (lp.a_ub.rows() != lp.b_ub.size() || lp.a_eq.rows() != lp.b_eq.size()) {
    throw std::invalid_argument("solve_lp: row counts disagree with rhs");
  }
  if ((lp.a_ub.rows() > 0 && lp.a_ub.cols() != nvars) ||
      (lp.a_eq.rows() > 0 && lp.a_eq.cols() != nvars)) {
    throw std::invalid_argument("solve_lp: column counts disagree with c");
  }
  if (!lp.bounds.empty() && static_cast<int>(lp.bounds.size()) != nvars) {
    throw std::invalid_argument("solve_lp: bounds length disagrees with c");
  }
  for (const auto& [lo, hi] : lp.bounds) {
    if (lo > hi) throw std::invalid_argument("solve_lp: bound lo > hi");
  }

  // Lower to conic form: all inequalities (given rows plus finite bounds)
  // become orthant rows of G x + s = h.
  std::vector<Eigen::Triplet<double>> g_trips;
  std::vector<double> h_vals;
  int row = 0;
  for (int k = 0; k < lp.a_ub.outerSize(); ++k) {
    for (SpMat::InnerIterator it(lp.a_ub, k); it; ++it) {
      g_trips.emplace_back(static_cast<int>(it.row()),
                           static_cast<int>(it.col()), it.value());
    }
  }
  row = static_cast<int>(lp.a_ub.rows());
  for (int i = 0; i < lp.b_ub.size(); ++i) h_vals.push_back(lp.b_ub(i));
  for (int i = 0; i < static_cast<int>(lp.bounds.size()); ++i) {
    const auto [lo, hi] = lp.bounds[i];
    if (std::isfinite(hi)) {
      g_trips.emplace_back(row++, i, 1.0);
      h_vals.push_back(hi);
    }
    if (std::isfinite(lo)) {
      g_trips.emplace_back(row++, i, -1.0);
      h_vals.push_back(-lo);
    }
  }

  conelp::Problem problem;
  problem.c = lp.c;
  problem.a = lp.a_eq;
  if (problem.a.cols() != nvars) problem.a.resize(lp.a_eq.rows(), nvars);
  problem.b = lp.b_eq;
  problem.g.resize(row, nvars);
  problem.g.setFromTriplets(g_trips.begin(), g_trips.end());
  problem.h.resize(row);
  for (int i = 0; i < row; ++i) problem.h(i) = h_vals[i];
  problem.cone.orthant = row;

  return run_solver(problem, tol);
}

ShorBlockSolution solve_shor_block(const ShorBlockSpec& block, double tol) {
  const int m = block.mode_count;
  const int n = static_cast<int>(block.zdot.size());
  if (m < 1) throw std::invalid_argument("solve_shor_block: mode_count < 1");
  if (block.v.rows() != n || block.v.cols() != m) {
    throw std::invalid_argument("solve_shor_block: V shape mismatch");
  }

  ShorBlockSolution sol;
  if (m == 1) {
    // The constraints force the point mass lambda = (1), Lambda = (1); the
    // semidefinite block would have no interior, so answer directly.
    sol.lambda = Vec::Ones(1);
    sol.moment_block = Mat::Ones(1, 1);
    sol.status.status = SolveOutcome::kOptimal;
    sol.status.objective = (block.zdot - block.v.col(0)).lpNorm<1>();
    return sol;
  }

  // Variables: lambda (m), packed lower triangle of Lambda (m(m+1)/2),
  // delta (n).
  const int n_lam = m;
  const int n_pack = m * (m + 1) / 2;
  const int nvars = n_lam + n_pack + n;
  const auto lam_at = [](int j) { return j; };
  const auto pack_at = [&](int i, int j) {  // i >= j within Lambda
    return n_lam + packed_index(i, j, m);
  };
  const auto delta_at = [&](int k) { return n_lam + n_pack + k; };

  conelp::Problem problem;
  problem.c = Vec::Zero(nvars);
  for (int k = 0; k < n; ++k) problem.c(delta_at(k)) = 1.0;

  // Equalities: diag(Lambda) = lambda (m rows), sum(lambda) = 1 (1 row).
  std::vector<Eigen::Triplet<double>> a_trips;
  for (int j = 0; j < m; ++j) {
    a_trips.emplace_back(j, pack_at(j, j), 1.0);
    a_trips.emplace_back(j, lam_at(j), -1.0);
  }
  for (int j = 0; j < m; ++j) a_trips.emplace_back(m, lam_at(j), 1.0);
  problem.a.resize(m + 1, nvars);
  problem.a.setFromTriplets(a_trips.begin(), a_trips.end());
  problem.b = Vec::Zero(m + 1);
  problem.b(m) = 1.0;

  // Cone rows: 3n orthant rows (two-sided residual bound plus delta >= 0),
  // then the svec-packed bordered moment matrix.
  const int q = m + 1;
  const int psd_dim = conelp::svec_dim(q);
  const int n_orth = 3 * n;
  std::vector<Eigen::Triplet<double>> g_trips;
  Vec h = Vec::Zero(n_orth + psd_dim);
  for (int k = 0; k < n; ++k) {
    // zdot_k - (V lambda)_k <= delta_k
    for (int j = 0; j < m; ++j) {
      g_trips.emplace_back(k, lam_at(j), -block.v(k, j));
    }
    g_trips.emplace_back(k, delta_at(k), -1.0);
    h(k) = -block.zdot(k);
    // (V lambda)_k - zdot_k <= delta_k
    for (int j = 0; j < m; ++j) {
      g_trips.emplace_back(n + k, lam_at(j), block.v(k, j));
    }
    g_trips.emplace_back(n + k, delta_at(k), -1.0);
    h(n + k) = block.zdot(k);
    // delta_k >= 0
    g_trips.emplace_back(2 * n + k, delta_at(k), -1.0);
  }
  // s_psd = svec([[1, lambda'], [lambda, Lambda]]) as a function of x:
  // h carries the constant corner, -G the variable entries.
  const double rt2 = std::sqrt(2.0);
  h(n_orth + packed_index(0, 0, q)) = 1.0;
  for (int j = 0; j < m; ++j) {
    g_trips.emplace_back(n_orth + packed_index(j + 1, 0, q), lam_at(j), -rt2);
  }
  for (int j = 0; j < m; ++j) {
    for (int i = j; i < m; ++i) {
      const double coeff = (i == j) ? 1.0 : rt2;
      g_trips.emplace_back(n_orth + packed_index(i + 1, j + 1, q),
                           pack_at(i, j), -coeff);
    }
  }
  problem.g.resize(n_orth + psd_dim, nvars);
  problem.g.setFromTriplets(g_trips.begin(), g_trips.end());
  problem.h = h;
  problem.cone.orthant = n_orth;
  problem.cone.psd_sizes = {q};

  sol.status = run_solver(problem, tol);
  if (sol.status.status == SolveOutcome::kOptimal) {
    const Vec& x = sol.status.primal;
    sol.lambda = x.head(m);
    sol.moment_block.resize(m, m);
    for (int j = 0; j < m; ++j) {
      for (int i = j; i < m; ++i) {
        sol.moment_block(i, j) = x(pack_at(i, j));
        sol.moment_block(j, i) = x(pack_at(i, j));
      }
    }
  }
  return sol;
}

}  // namespace switchid
