#pragma once

#include "switchid/core.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace switchid {

/// Thrown when integration produces a non-finite state. Carries the last
/// time at which the state was still finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time(last_valid_time) {}
  double last_valid_time;
};

enum class SamplingScheme { kUniformBox, kTrajectory };

struct SamplingSpec {
  SamplingScheme scheme = SamplingScheme::kUniformBox;
  /// Per-dimension (lo, hi) bounds; used by the uniform-box scheme and by
  /// rollout initial-condition draws.
  std::vector<std::pair<double, double>> box;
  int count = 0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  /// Trajectory scheme settings.
  std::vector<Vec> initial_conditions;
  double dt = 0.0;
  double horizon = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<int> modes;  // active mode at each grid point (0-based)
  /// Set when more than half of the consecutive grid steps change mode,
  /// the signature of chattering around a surface at this step size.
  bool chattering = false;

  int size() const { return static_cast<int>(times.size()); }
};

/// Active mode of the model at state z. A single-mode model needs no
/// surfaces; otherwise surfaces and modebook must be present.
int active_mode(const SwitchingSystemModel& model, const Vec& z);

/// Vector field of the active mode at z.
Vec eval_model(const SwitchingSystemModel& model, const Vec& z);

/// Classical fixed-step fourth-order Runge-Kutta integration over [0, T].
/// The step count is ceil(T / dt) and the actual step T / steps (<= dt), so
/// the grid is uniform and lands exactly on the horizon. The active mode is
/// re-resolved at every stage state; there is no event detection.
Trajectory integrate(const SwitchingSystemModel& model, const Vec& z0,
                     double dt, double horizon);

/// Draws (state, derivative, mode) samples from the model. The uniform-box
/// scheme samples states independently; the trajectory scheme integrates the
/// given initial conditions and subsamples the pooled grid points evenly.
/// Derivatives come from the true active mode's field; optional Gaussian
/// noise (noise_std) is added to the derivatives afterwards.
Dataset generate_dataset(const SwitchingSystemModel& model,
                         const SamplingSpec& spec);

}  // namespace switchid
