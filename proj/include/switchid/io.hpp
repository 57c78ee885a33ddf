#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchid/bilevel.hpp"
#include "switchid/core.hpp"
#include "switchid/simulate.hpp"
#include "switchid/surface.hpp"

// Configuration loading and artifact persistence: the JSON config format,
// the dataset CSV format, and the model/surfaces/metrics/history files.
// Every written file embeds the config hash and the governing seed; doubles
// round-trip bit-identically.

namespace switchid {

/// Malformed or inconsistent configuration (maps to exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or file-format failure (maps to exit code 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ground-truth system description: mode coefficient matrices over a
/// declared basis degree, plus optional switching surfaces and sign codes.
struct SystemConfig {
  int state_dim = 0;
  int degree = 1;
  std::vector<Mat> mode_coeffs;
  int surface_degree = 0;
  std::vector<Vec> surface_coeffs;
  std::vector<std::vector<int>> modebook_codes;
};

struct EvaluateConfig {
  int test_count = 2000;
  std::uint64_t test_seed = 1;
  int rollout_count = 12;
  std::uint64_t rollout_seed = 2;
  double dt = 0.01;
  double horizon = 5.0;
};

/// One parsed configuration file: sections system, sampling, identify,
/// surface, evaluate. `hash` is the FNV-1a digest of the file bytes and
/// `echo` the parsed document (re-embedded into outputs).
struct ToolConfig {
  SystemConfig system;
  SamplingSpec sampling;
  BilevelConfig identify;
  SurfaceFitConfig surface;
  EvaluateConfig evaluate;
  std::string hash;
  std::string echo;
};

/// 64-bit FNV-1a digest of a byte string, as 16 hex characters.
std::string fnv1a_hex(const std::string& bytes);

/// Shortest decimal form of x that parses back to exactly x.
std::string format_double(double x);

ToolConfig load_config(const std::string& path);

/// Builds the ground-truth model (modes plus surfaces/modebook when the
/// config declares them) from the system section.
SwitchingSystemModel build_true_model(const SystemConfig& system);

/// Dataset CSV: one `#` provenance line, a mandatory header
/// z_1..z_n, zdot_1..zdot_n, true_mode, then one row per sample. Mode
/// labels are stored 1-based with 0 meaning unknown.
void write_dataset_csv(const std::string& path, const Dataset& dataset,
                       const std::string& config_hash);
Dataset read_dataset_csv(const std::string& path);

void write_model_json(const std::string& path,
                      const SwitchingSystemModel& model,
                      const ToolConfig& config, std::uint64_t seed);
SwitchingSystemModel read_model_json(const std::string& path);

void write_history_csv(const std::string& path,
                       const std::vector<IterationRecord>& records,
                       const std::string& config_hash, std::uint64_t seed);

/// Everything cmd_fit_surface persists: the normalized surfaces, the sign
/// codes, the certificate, and the fit diagnostics.
struct SurfacesFile {
  SurfaceSet surfaces;
  ModeBook modebook;
  std::vector<double> certificate_t;
  std::vector<Vec> certificate_witness;
  EpsilonInterval admissible;
  double margin_used = 0.0;
  double total_slack = 0.0;
  std::vector<double> l1_norms;
};

void write_surfaces_json(const std::string& path, const SurfacesFile& file,
                         const std::string& config_hash, std::uint64_t seed);
SurfacesFile read_surfaces_json(const std::string& path);

}  // namespace switchid
