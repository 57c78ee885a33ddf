#include "switchid/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "switchid/simulate.hpp"

namespace switchid {

namespace {

void check_labels(const std::vector<int>& labels, int mode_count,
                  const char* which) {
  for (int v : labels) {
    if (v < 0 || v >= mode_count) {
      throw std::invalid_argument(std::string(which) +
                                  " label out of range for the mode count");
    }
  }
}

}  // namespace

std::vector<int> align_labels(const std::vector<int>& pred,
                              const std::vector<int>& truth, int mode_count) {
  if (mode_count < 1) throw std::invalid_argument("mode_count must be >= 1");
  if (mode_count > 8) {
    throw CapacityError(
        "label alignment enumerates all permutations; capped at 8 modes");
  }
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("pred and truth must have equal length");
  }
  check_labels(pred, mode_count, "pred");
  check_labels(truth, mode_count, "truth");

  // Count co-occurrences once, then score each permutation from the table.
  Eigen::MatrixXi joint = Eigen::MatrixXi::Zero(mode_count, mode_count);
  for (std::size_t i = 0; i < pred.size(); ++i) joint(pred[i], truth[i])++;

  std::vector<int> perm(mode_count);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  long best_count = -1;
  do {
    long count = 0;
    for (int j = 0; j < mode_count; ++j) count += joint(j, perm[j]);
    // std::next_permutation visits permutations in lexicographic order, so a
    // strict improvement rule keeps the lexicographically smallest winner.
    if (count > best_count) {
      best_count = count;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double velocity_rmse(const SwitchingSystemModel& model,
                     const Dataset& dataset) {
  if (dataset.size() == 0) throw std::invalid_argument("empty dataset");
  if (dataset.n != model.state_dim()) {
    throw std::invalid_argument("dataset and model dimensions differ");
  }
  double total = 0.0;
  for (const Sample& sample : dataset.samples) {
    const Vec predicted = eval_model(model, sample.z);
    total += (sample.zdot - predicted).squaredNorm();
  }
  return std::sqrt(total / (static_cast<double>(dataset.size()) * dataset.n));
}

ModeMetrics mode_metrics(const std::vector<int>& pred,
                         const std::vector<int>& truth, int mode_count) {
  ModeMetrics metrics;
  metrics.permutation = align_labels(pred, truth, mode_count);
  const std::size_t count = pred.size();
  if (count == 0) throw std::invalid_argument("empty label vectors");

  std::size_t agree = 0;
  std::vector<std::size_t> inter(mode_count, 0), uni(mode_count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const int mapped = metrics.permutation[pred[i]];
    if (mapped == truth[i]) {
      agree++;
      inter[mapped]++;
      uni[mapped]++;
    } else {
      uni[mapped]++;
      uni[truth[i]]++;
    }
  }
  metrics.accuracy = static_cast<double>(agree) / static_cast<double>(count);
  double iou_sum = 0.0;
  for (int j = 0; j < mode_count; ++j) {
    iou_sum += uni[j] == 0 ? 1.0
                           : static_cast<double>(inter[j]) /
                                 static_cast<double>(uni[j]);
  }
  metrics.miou = iou_sum / mode_count;
  return metrics;
}

RolloutComparison rollout_metrics(const SwitchingSystemModel& true_model,
                                  const SwitchingSystemModel& identified,
                                  const std::vector<Vec>& initial_conditions,
                                  double dt, double horizon) {
  if (initial_conditions.empty()) {
    throw std::invalid_argument("need at least one initial condition");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  RolloutComparison comparison;
  const int n = true_model.state_dim();
  for (const Vec& z0 : initial_conditions) {
    RolloutMetrics metrics;
    try {
      const Trajectory reference = integrate(true_model, z0, dt, horizon);
      const Trajectory estimate = integrate(identified, z0, dt, horizon);
      double sum_sq = 0.0;
      for (int k = 0; k < reference.size(); ++k) {
        const double err = (reference.states[k] - estimate.states[k]).norm();
        sum_sq += err * err;
        metrics.max_error = std::max(metrics.max_error, err);
      }
      metrics.final_error =
          (reference.states.back() - estimate.states.back()).norm();
      metrics.rmse = std::sqrt(sum_sq / (n * reference.size()));
    } catch (const DivergenceError&) {
      metrics = {kInf, kInf, kInf, true};
    }
    comparison.per_trajectory.push_back(metrics);
  }

  RolloutMetrics& total = comparison.aggregate;
  for (const RolloutMetrics& metrics : comparison.per_trajectory) {
    total.rmse += metrics.rmse;
    total.final_error += metrics.final_error;
    total.max_error += metrics.max_error;
    total.diverged = total.diverged || metrics.diverged;
  }
  const double count = static_cast<double>(comparison.per_trajectory.size());
  total.rmse /= count;
  total.final_error /= count;
  total.max_error /= count;
  return comparison;
}

}  // namespace switchid
