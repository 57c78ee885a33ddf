#include "switchid/simulate.hpp"

#include "switchid/rng.hpp"

#include <cmath>
#include <iostream>

namespace switchid {

namespace {

void validate_model(const SwitchingSystemModel& model) {
  if (model.modes.empty()) {
    throw std::invalid_argument("model has no modes");
  }
  for (const ModeDynamics& mode : model.modes) {
    if (mode.coeffs.rows() != model.basis.n ||
        mode.coeffs.cols() != model.basis.size()) {
      throw std::invalid_argument("model mode coefficients have wrong shape");
    }
  }
  if (model.mode_count() > 1) {
    if (!model.surfaces || !model.modebook) {
      throw std::invalid_argument(
          "multi-mode model needs surfaces and a modebook to be simulated");
    }
    if (model.modebook->mode_count() != model.mode_count()) {
      throw std::invalid_argument("modebook size != mode count");
    }
  }
}

}  // namespace

int active_mode(const SwitchingSystemModel& model, const Vec& z) {
  if (model.mode_count() == 1) return 0;
  if (!model.surfaces || !model.modebook) {
    throw std::invalid_argument(
        "active_mode: model lacks surfaces or modebook");
  }
  return region_mode(*model.surfaces, *model.modebook, z);
}

Vec eval_model(const SwitchingSystemModel& model, const Vec& z) {
  return eval_mode(model.modes[active_mode(model, z)], model.basis, z);
}

Trajectory integrate(const SwitchingSystemModel& model, const Vec& z0,
                     double dt, double horizon) {
  validate_model(model);
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: need dt > 0");
  if (!(horizon >= dt)) {
    throw std::invalid_argument("integrate: need horizon >= dt");
  }
  if (z0.size() != model.state_dim()) {
    throw std::invalid_argument("integrate: initial state has wrong dimension");
  }

  const int steps = static_cast<int>(std::ceil(horizon / dt - 1e-12));
  const double h = horizon / steps;

  const auto field = [&](const Vec& z) { return eval_model(model, z); };

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.modes.reserve(steps + 1);

  Vec z = z0;
  traj.times.push_back(0.0);
  traj.states.push_back(z);
  traj.modes.push_back(active_mode(model, z));

  int mode_changes = 0;
  for (int k = 0; k < steps; ++k) {
    const Vec k1 = field(z);
    const Vec k2 = field(z + 0.5 * h * k1);
    const Vec k3 = field(z + 0.5 * h * k2);
    const Vec k4 = field(z + h * k3);
    z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) {
      throw DivergenceError(
          "integrate: state diverged after t = " + std::to_string(k * h),
          k * h);
    }
    traj.times.push_back((k + 1) * h);
    traj.states.push_back(z);
    traj.modes.push_back(active_mode(model, z));
    if (traj.modes[k + 1] != traj.modes[k]) ++mode_changes;
  }
  traj.chattering = steps > 0 && mode_changes * 2 > steps;
  return traj;
}

Dataset generate_dataset(const SwitchingSystemModel& model,
                         const SamplingSpec& spec) {
  validate_model(model);
  if (spec.count < 1) {
    throw std::invalid_argument("generate_dataset: need count >= 1");
  }
  const int n = model.state_dim();

  Dataset data;
  data.n = n;
  data.seed = spec.seed;
  data.samples.reserve(spec.count);
  Rng rng(spec.seed);

  std::vector<Vec> states;
  std::vector<int> modes;

  if (spec.scheme == SamplingScheme::kUniformBox) {
    if (static_cast<int>(spec.box.size()) != n) {
      throw std::invalid_argument("generate_dataset: box dimension mismatch");
    }
    for (const auto& [lo, hi] : spec.box) {
      if (!(lo < hi)) {
        throw std::invalid_argument("generate_dataset: empty box interval");
      }
    }
    states.reserve(spec.count);
    for (int i = 0; i < spec.count; ++i) {
      Vec z(n);
      for (int k = 0; k < n; ++k) {
        z(k) = rng.uniform(spec.box[k].first, spec.box[k].second);
      }
      states.push_back(std::move(z));
      modes.push_back(active_mode(model, states.back()));
    }
    data.generator = "uniform-box";
  } else {
    if (spec.initial_conditions.empty()) {
      throw std::invalid_argument(
          "generate_dataset: trajectory scheme needs initial conditions");
    }
    std::vector<Vec> pool_states;
    std::vector<int> pool_modes;
    for (const Vec& z0 : spec.initial_conditions) {
      const Trajectory traj = integrate(model, z0, spec.dt, spec.horizon);
      if (traj.chattering) {
        std::cerr << "warning: trajectory chatters between modes on more "
                     "than half of its steps; consider a smaller dt\n";
      }
      for (int k = 0; k < traj.size(); ++k) {
        pool_states.push_back(traj.states[k]);
        pool_modes.push_back(traj.modes[k]);
      }
    }
    if (static_cast<int>(pool_states.size()) < spec.count) {
      throw std::invalid_argument(
          "generate_dataset: trajectories provide fewer points than requested");
    }
    // Evenly spaced subsample of the pooled grid points.
    const std::size_t pool = pool_states.size();
    for (int i = 0; i < spec.count; ++i) {
      const std::size_t idx = (static_cast<std::size_t>(i) * pool) / spec.count;
      states.push_back(pool_states[idx]);
      modes.push_back(pool_modes[idx]);
    }
    data.generator = "trajectory";
  }

  for (int i = 0; i < spec.count; ++i) {
    Sample s;
    s.z = states[i];
    s.true_mode = modes[i];
    s.zdot = eval_mode(model.modes[modes[i]], model.basis, states[i]);
    if (spec.noise_std > 0.0) {
      for (int k = 0; k < n; ++k) s.zdot(k) += spec.noise_std * rng.normal();
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace switchid
