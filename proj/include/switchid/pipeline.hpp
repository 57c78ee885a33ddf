#pragma once

#include <optional>
#include <string>
#include <vector>

#include "switchid/evaluate.hpp"
#include "switchid/io.hpp"

// One function per CLI command, reused verbatim by the end-to-end tests.
// Each loads its inputs, runs the corresponding library stage, writes every
// output file, and returns what the caller may want to print.

namespace switchid {

struct SimulateReport {
  Dataset dataset;
  /// Samples per true mode (unlabeled samples are not counted).
  std::vector<int> mode_counts;
};

/// Generates a dataset from the config's ground-truth system and writes it
/// as CSV to output_path.
SimulateReport run_simulate(const ToolConfig& config,
                            const std::string& output_path);

struct IdentifyReport {
  IdentifyResult result;
  std::uint64_t dataset_seed = 0;
};

/// Runs the alternation on a stored dataset; writes model.json and
/// history.csv into output_dir.
IdentifyReport run_identify(const ToolConfig& config,
                            const std::string& dataset_path,
                            const std::string& output_dir);

struct SurfaceReport {
  SurfacesFile file;
  /// True when every certificate margin is positive.
  bool separable = true;
  std::uint64_t dataset_seed = 0;
};

/// Labels the dataset with the stored model, certifies separability, fits
/// the switching surfaces, and writes the surfaces JSON to output_path.
/// The model must have at least two modes.
SurfaceReport run_fit_surface(const ToolConfig& config,
                              const std::string& dataset_path,
                              const std::string& model_path,
                              const std::string& output_path);

struct EvaluateReport {
  std::optional<double> velocity_rmse;
  std::optional<ModeMetrics> mode;
  std::optional<RolloutComparison> rollout;
  std::vector<std::string> warnings;
};

/// Regenerates a disjoint test set from the config's ground truth, scores
/// the stored model (+ surfaces when given: pass an empty path to skip),
/// and writes metrics.json plus per-trajectory rollout CSVs into
/// output_dir.
EvaluateReport run_evaluate(const ToolConfig& config,
                            const std::string& model_path,
                            const std::string& surfaces_path,
                            const std::string& output_dir);

}  // namespace switchid
