#pragma once

#include <vector>

#include "switchid/core.hpp"

// Evaluation of identified models against ground truth: permutation-based
// label alignment, pointwise velocity and mode metrics, and paired rollouts.

namespace switchid {

/// Permutation p (length M) matching predicted labels to truth labels:
/// predicted label j corresponds to truth label p[j]. Chosen by exhaustive
/// search over all M! permutations to maximize the agreement count
/// #{i : p[pred_i] == truth_i}; ties resolve to the lexicographically
/// smallest permutation. Labels are 0-based. Throws CapacityError when
/// M > 8 (the search is exhaustive).
std::vector<int> align_labels(const std::vector<int>& pred,
                              const std::vector<int>& truth, int mode_count);

/// Root-mean-square velocity error over the dataset,
///   sqrt( (1/(N n)) sum_i ||zdot_i - F_{j(z_i)}(z_i)||_2^2 ),
/// where j(z) is the model's active mode. Multi-mode models must carry
/// switching surfaces (the active mode is undecidable pointwise otherwise).
double velocity_rmse(const SwitchingSystemModel& model, const Dataset& dataset);

struct ModeMetrics {
  double accuracy = 0.0;
  double miou = 0.0;
  /// Alignment used: predicted label j was matched to truth label
  /// permutation[j].
  std::vector<int> permutation;
};

/// Accuracy and mean intersection-over-union of predicted vs truth labels
/// after align_labels. A mode absent from both sides (empty union) counts
/// as IoU 1.
ModeMetrics mode_metrics(const std::vector<int>& pred,
                         const std::vector<int>& truth, int mode_count);

struct RolloutMetrics {
  double rmse = 0.0;         // sqrt(mean over the grid of ||dz||^2 / n)
  double final_error = 0.0;  // ||dz(T)||
  double max_error = 0.0;    // max over the grid of ||dz||
  bool diverged = false;     // integration of either model blew up
};

struct RolloutComparison {
  std::vector<RolloutMetrics> per_trajectory;
  /// Field-wise mean over trajectories; `diverged` is true when any
  /// trajectory diverged (its metrics are infinite and poison the means).
  RolloutMetrics aggregate;
};

/// Integrates both models from every initial condition on an identical
/// time grid and compares states pointwise. Divergence is reported per
/// trajectory, not thrown.
RolloutComparison rollout_metrics(const SwitchingSystemModel& true_model,
                                  const SwitchingSystemModel& identified,
                                  const std::vector<Vec>& initial_conditions,
                                  double dt, double horizon);

}  // namespace switchid
