#include "switchid/bilevel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "switchid/evaluate.hpp"
#include "switchid/rng.hpp"

namespace switchid {

namespace {

/// Two modes tie when their vertex costs differ by no more than this.
constexpr double kTieTol = 1e-10;
/// Assignments are a fixed point when no lambda entry moved more than this.
constexpr double kLambdaDriftTol = 1e-9;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::vector<ModeAssignment> run_assignment(
    const Dataset& dataset, const std::vector<ModeDynamics>& modes,
    const MonomialBasis& basis, const BilevelConfig& config) {
  switch (config.relaxation) {
    case Relaxation::kLp:
      return assign_lp(dataset, modes, basis, config.solver_tol);
    case Relaxation::kSdp:
      return assign_sdp(dataset, modes, basis, config.solver_tol);
    case Relaxation::kExact:
      return assign_exact(dataset, modes, basis);
  }
  throw std::invalid_argument("unknown relaxation");
}

/// Per-sample tie sets: tied[i] lists the modes whose vertex cost matches
/// both the best vertex and the relaxed cost at the raw lambda (within
/// kTieTol), so overriding sample i to any of them cannot worsen the
/// objective. Samples without such a safe tie get an empty list.
std::vector<std::vector<int>> analyze_ties(
    const Dataset& dataset, const std::vector<ModeDynamics>& modes,
    const MonomialBasis& basis, const std::vector<ModeAssignment>& raw) {
  const int m = static_cast<int>(modes.size());
  std::vector<std::vector<int>> tied(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Sample& sample = dataset.samples[i];
    const Vec phi = eval_basis(basis, sample.z);
    Vec vertex_cost(m);
    for (int j = 0; j < m; ++j) {
      vertex_cost(j) = (sample.zdot - modes[j].coeffs * phi).lpNorm<1>();
    }
    const double cmin = vertex_cost.minCoeff();
    std::vector<int> candidates;
    for (int j = 0; j < m; ++j) {
      if (vertex_cost(j) <= cmin + kTieTol) candidates.push_back(j);
    }
    const double soft_cost =
        residual_l1(sample, modes, basis, raw[i].lambda).second;
    if (candidates.size() >= 2 && cmin <= soft_cost + kTieTol) {
      tied[i] = std::move(candidates);
    }
  }
  return tied;
}

void override_to_mode(ModeAssignment& assignment, int mode, int mode_count) {
  assignment.lambda = Vec::Zero(mode_count);
  assignment.lambda(mode) = 1.0;
  assignment.hardened = mode;
  assignment.moment_block.reset();
}

/// Round-robin split: the k-th tied sample takes the k-th entry (mod size)
/// of its own tie set. `skip` marks samples some other rule already placed.
std::vector<ModeAssignment> round_robin_split(
    const std::vector<ModeAssignment>& raw,
    const std::vector<std::vector<int>>& tied, int mode_count,
    const std::vector<char>* skip = nullptr) {
  std::vector<ModeAssignment> effective = raw;
  long counter = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (tied[i].empty() || (skip && (*skip)[i])) continue;
    const int pick = tied[i][counter % static_cast<long>(tied[i].size())];
    ++counter;
    override_to_mode(effective[i], pick, mode_count);
  }
  return effective;
}

/// Quantile-chunk split: fully-tied samples are sorted by the key and cut
/// into mode_count equal contiguous chunks, chunk c going to mode c, which
/// seeds every mode with a spatially coherent region. Partially tied
/// samples fall back to the round-robin rule.
std::vector<ModeAssignment> chunk_split(
    const std::vector<ModeAssignment>& raw,
    const std::vector<std::vector<int>>& tied, int mode_count,
    const std::vector<int>& full_tied, const std::vector<double>& key) {
  std::vector<int> order(full_tied.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return key[a] < key[b];
  });

  std::vector<char> placed(raw.size(), 0);
  for (int i : full_tied) placed[i] = 1;
  std::vector<ModeAssignment> effective =
      round_robin_split(raw, tied, mode_count, &placed);

  const std::size_t count = full_tied.size();
  for (std::size_t rank = 0; rank < count; ++rank) {
    const int sample = full_tied[order[rank]];
    const int mode = std::min<int>(
        static_cast<int>(rank * mode_count / count), mode_count - 1);
    override_to_mode(effective[sample], mode, mode_count);
  }
  return effective;
}

/// Candidate effective assignments for one pass. Ordinarily just the
/// round-robin split of the safe ties. When ties are pervasive — a
/// symmetric start such as the identity initialization leaves every mode
/// predicting the same velocity, so every sample ties — also proposes
/// quantile-chunk seeds along each state coordinate and along the squared
/// radius; the caller picks the candidate whose refit scores best. Every
/// candidate only overrides guard-checked ties, so any choice preserves
/// the monotone descent of the alternation.
std::vector<std::vector<ModeAssignment>> candidate_assignments(
    const Dataset& dataset, const std::vector<ModeDynamics>& modes,
    const MonomialBasis& basis, const std::vector<ModeAssignment>& raw) {
  const int m = static_cast<int>(modes.size());
  const std::vector<std::vector<int>> tied =
      analyze_ties(dataset, modes, basis, raw);

  std::vector<std::vector<ModeAssignment>> candidates;
  candidates.push_back(round_robin_split(raw, tied, m));

  std::vector<int> full_tied;
  for (std::size_t i = 0; i < tied.size(); ++i) {
    if (static_cast<int>(tied[i].size()) == m) {
      full_tied.push_back(static_cast<int>(i));
    }
  }
  const int pervasive =
      std::max(dataset.size() / 4, 2 * m);
  if (m >= 2 && static_cast<int>(full_tied.size()) >= pervasive) {
    std::vector<double> key(full_tied.size());
    for (int k = 0; k < dataset.n; ++k) {
      for (std::size_t r = 0; r < full_tied.size(); ++r) {
        key[r] = dataset.samples[full_tied[r]].z(k);
      }
      candidates.push_back(chunk_split(raw, tied, m, full_tied, key));
    }
    for (std::size_t r = 0; r < full_tied.size(); ++r) {
      key[r] = dataset.samples[full_tied[r]].z.squaredNorm();
    }
    candidates.push_back(chunk_split(raw, tied, m, full_tied, key));
  }
  return candidates;
}

double assignment_cost(const Dataset& dataset,
                       const std::vector<ModeDynamics>& modes,
                       const MonomialBasis& basis,
                       const std::vector<ModeAssignment>& assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    total +=
        residual_l1(dataset.samples[i], modes, basis, assignments[i].lambda)
            .second;
  }
  return total;
}

int count_truth_mismatch(const std::vector<int>& labels,
                         const Dataset& dataset, int mode_count) {
  if (!dataset.fully_labeled()) return -1;
  std::vector<int> truth(dataset.samples.size());
  int max_label = mode_count - 1;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth[i] = *dataset.samples[i].true_mode;
    max_label = std::max(max_label, truth[i]);
  }
  if (max_label + 1 > 8) return -1;  // alignment is exhaustive, capped at 8
  const std::vector<int> perm = align_labels(labels, truth, max_label + 1);
  int mismatches = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (perm[labels[i]] != truth[i]) ++mismatches;
  }
  return mismatches;
}

}  // namespace

std::vector<ModeDynamics> init_dynamics(int n, int degree, int mode_count,
                                        InitScheme scheme, double scale,
                                        std::uint64_t seed) {
  if (n < 1 || mode_count < 1 || degree < 0) {
    throw std::invalid_argument("init_dynamics: bad dimensions");
  }
  const MonomialBasis basis = MonomialBasis::create(n, degree);
  std::vector<ModeDynamics> modes(mode_count);
  if (scheme == InitScheme::kIdentity) {
    if (degree < 1) {
      throw std::invalid_argument(
          "identity initialization needs degree >= 1 (no linear monomials)");
    }
    Mat identity = Mat::Zero(n, basis.size());
    for (int k = 0; k < n; ++k) identity(k, basis.linear_index(k)) = 1.0;
    for (ModeDynamics& mode : modes) mode.coeffs = identity;
  } else {
    Rng rng(seed);
    for (ModeDynamics& mode : modes) {
      mode.coeffs.resize(n, basis.size());
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < basis.size(); ++c) {
          mode.coeffs(r, c) = rng.uniform(-scale, scale);
        }
      }
    }
  }
  return modes;
}

IdentifyResult identify(const Dataset& dataset, const BilevelConfig& config) {
  if (dataset.size() == 0) throw std::invalid_argument("identify: no samples");
  if (config.mode_count < 1 || config.max_iters < 1) {
    throw std::invalid_argument("identify: bad configuration");
  }
  const MonomialBasis basis = MonomialBasis::create(dataset.n, config.degree);
  std::vector<ModeDynamics> modes;
  if (!config.initial_modes.empty()) {
    if (static_cast<int>(config.initial_modes.size()) != config.mode_count) {
      throw std::invalid_argument(
          "identify: initial_modes count != mode_count");
    }
    for (const ModeDynamics& mode : config.initial_modes) {
      if (mode.coeffs.rows() != dataset.n ||
          mode.coeffs.cols() != basis.size()) {
        throw std::invalid_argument(
            "identify: initial_modes have the wrong shape");
      }
    }
    modes = config.initial_modes;
  } else {
    modes =
        init_dynamics(dataset.n, config.degree, config.mode_count, config.init,
                      config.init_scale, config.init_seed);
  }

  IdentifyResult result;
  double prev_cost = 0.0;
  std::vector<ModeAssignment> prev_effective;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    IterationRecord record;
    record.iteration = iter;

    const auto assign_start = std::chrono::steady_clock::now();
    std::vector<ModeAssignment> raw;
    std::vector<std::vector<ModeAssignment>> candidates;
    std::size_t best = 0;
    FitResult fit;
    try {
      raw = run_assignment(dataset, modes, basis, config);
      candidates = candidate_assignments(dataset, modes, basis, raw);
      record.assign_seconds = seconds_since(assign_start);

      // Fit every candidate split and keep the cheapest (first wins ties).
      const auto fit_start = std::chrono::steady_clock::now();
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        FitResult trial =
            fit_dynamics(dataset, candidates[c], basis, config.mode_count,
                         config.eta, &modes, config.solver_tol);
        if (c == 0 || trial.objective < fit.objective) {
          fit = std::move(trial);
          best = c;
        }
      }
      record.fit_seconds = seconds_since(fit_start);
    } catch (const SolverError& e) {
      throw SolverError("iteration " + std::to_string(iter) + ": " + e.what());
    }
    std::vector<ModeAssignment> effective = std::move(candidates[best]);
    modes = std::move(fit.modes);
    record.cost = fit.objective;

    std::vector<int> labels(effective.size());
    for (std::size_t i = 0; i < effective.size(); ++i) {
      labels[i] = effective[i].hardened;
    }
    record.mismatch_truth =
        count_truth_mismatch(labels, dataset, config.mode_count);
    if (config.relaxation == Relaxation::kSdp) {
      record.tightness = tightness_ratio(raw);
    }

    bool fixed_point = false;
    if (!prev_effective.empty()) {
      int changed = 0;
      double drift = 0.0;
      for (std::size_t i = 0; i < effective.size(); ++i) {
        if (effective[i].hardened != prev_effective[i].hardened) ++changed;
        drift = std::max(drift, (effective[i].lambda - prev_effective[i].lambda)
                                    .lpNorm<Eigen::Infinity>());
      }
      record.mismatch_prev = changed;
      fixed_point = changed == 0 && drift <= kLambdaDriftTol;
    }
    result.records.push_back(record);

    const bool settled =
        iter >= 2 && prev_cost - record.cost < config.cost_tol;
    prev_cost = record.cost;
    prev_effective = effective;

    if (iter == config.max_iters || settled || fixed_point) {
      result.assignments = std::move(effective);
      result.relaxed = std::move(raw);
      result.labels = std::move(labels);
      result.converged = settled || fixed_point;
      break;
    }
  }

  result.model.basis = basis;
  result.model.modes = std::move(modes);
  return result;
}

std::pair<double, double> blockwise_optimality_check(
    const Dataset& dataset, const SwitchingSystemModel& model,
    const std::vector<ModeAssignment>& assignments,
    const BilevelConfig& config) {
  if (static_cast<int>(assignments.size()) != dataset.size()) {
    throw std::invalid_argument(
        "blockwise_optimality_check: assignment count != sample count");
  }
  const double current =
      assignment_cost(dataset, model.modes, model.basis, assignments);

  const std::vector<ModeAssignment> fresh =
      run_assignment(dataset, model.modes, model.basis, config);
  const double assign_gap =
      current - assignment_cost(dataset, model.modes, model.basis, fresh);

  const FitResult refit =
      fit_dynamics(dataset, assignments, model.basis, model.mode_count(),
                   config.eta, &model.modes, config.solver_tol);
  const double fit_gap = current - refit.objective;
  return {assign_gap, fit_gap};
}

}  // namespace switchid
