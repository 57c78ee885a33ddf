#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "switchid/simulate.hpp"

using namespace switchid;
using testutil::vec2;

TEST_CASE("harmonic oscillator returns to its start after one period") {
  const auto model = testutil::harmonic_oscillator();
  const double period = 2.0 * M_PI;
  const Trajectory traj = integrate(model, vec2(1.0, 0.0), 1e-3, period);
  const Vec final_state = traj.states.back();
  CHECK((final_state - vec2(1.0, 0.0)).norm() < 1e-6);
  CHECK(traj.times.back() == doctest::Approx(period).epsilon(1e-12));
  CHECK(!traj.chattering);
}

TEST_CASE("zero initial state stays at zero for linear dynamics") {
  const auto model = testutil::damped_oscillator_sls();
  const Trajectory traj = integrate(model, vec2(0.0, 0.0), 1e-2, 1.0);
  for (const Vec& z : traj.states) CHECK(z.norm() == 0.0);
}

TEST_CASE("RK4 endpoint error shrinks ~16x when the step is halved") {
  const auto model = testutil::harmonic_oscillator();
  const double period = 2.0 * M_PI;
  const auto endpoint_error = [&](double dt) {
    const Trajectory traj = integrate(model, vec2(1.0, 0.0), dt, period);
    return (traj.states.back() - vec2(1.0, 0.0)).norm();
  };
  const double coarse = endpoint_error(0.02);
  const double fine = endpoint_error(0.01);
  CHECK(coarse / fine > 12.0);
  CHECK(coarse / fine < 22.0);
}

TEST_CASE("switching oscillator alternates modes with the sign of x") {
  const auto model = testutil::damped_oscillator_sls();
  const Trajectory traj = integrate(model, vec2(1.0, 0.0), 1e-3, 10.0);
  bool saw_mode0 = false, saw_mode1 = false;
  for (int k = 0; k < traj.size(); ++k) {
    const int expected = traj.states[k](0) >= 0.0 ? 0 : 1;
    CHECK(traj.modes[k] == expected);
    saw_mode0 = saw_mode0 || traj.modes[k] == 0;
    saw_mode1 = saw_mode1 || traj.modes[k] == 1;
  }
  CHECK(saw_mode0);
  CHECK(saw_mode1);
  CHECK(!traj.chattering);
}

TEST_CASE("integration reports divergence with the last finite time") {
  SwitchingSystemModel model;
  model.basis = MonomialBasis::create(1, 1);
  ModeDynamics mode;
  mode.coeffs.resize(1, 2);
  mode.coeffs << 0.0, 10.0;  // xdot = 10 x, explodes quickly
  model.modes = {mode};
  Vec z0(1);
  z0 << 1.0;
  try {
    integrate(model, z0, 0.1, 100.0);
    FAIL("expected a divergence error");
  } catch (const DivergenceError& err) {
    CHECK(err.last_valid_time > 0.0);
    CHECK(err.last_valid_time < 100.0);
  }
}

TEST_CASE("uniform-box datasets are noiseless images of the true modes") {
  const auto model = testutil::damped_oscillator_sls();
  SamplingSpec spec;
  spec.scheme = SamplingScheme::kUniformBox;
  spec.box = {{-3.0, 3.0}, {-3.0, 3.0}};
  spec.count = 200;
  spec.seed = 42;
  const Dataset data = generate_dataset(model, spec);
  REQUIRE(data.size() == 200);
  CHECK(data.generator == "uniform-box");
  CHECK(data.fully_labeled());
  for (const Sample& s : data.samples) {
    REQUIRE(s.true_mode.has_value());
    CHECK(*s.true_mode == active_mode(model, s.z));
    const Vec expected = eval_mode(model.modes[*s.true_mode], model.basis, s.z);
    CHECK((s.zdot - expected).lpNorm<Eigen::Infinity>() == 0.0);
    for (int k = 0; k < 2; ++k) {
      CHECK(s.z(k) >= -3.0);
      CHECK(s.z(k) <= 3.0);
    }
  }
}

TEST_CASE("datasets are bit-identical across runs with one seed") {
  const auto model = testutil::quartic_oscillator_sps();
  SamplingSpec spec;
  spec.scheme = SamplingScheme::kUniformBox;
  spec.box = {{-3.0, 3.0}, {-3.5, 3.5}};
  spec.count = 100;
  spec.noise_std = 0.05;
  spec.seed = 7;
  const Dataset a = generate_dataset(model, spec);
  const Dataset b = generate_dataset(model, spec);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK((a.samples[i].z.array() == b.samples[i].z.array()).all());
    CHECK((a.samples[i].zdot.array() == b.samples[i].zdot.array()).all());
    CHECK(a.samples[i].true_mode == b.samples[i].true_mode);
  }

  SamplingSpec other = spec;
  other.seed = 8;
  const Dataset c = generate_dataset(model, other);
  bool any_difference = false;
  for (int i = 0; i < a.size(); ++i) {
    if (!(a.samples[i].z.array() == c.samples[i].z.array()).all()) {
      any_difference = true;
    }
  }
  CHECK(any_difference);
}

TEST_CASE("noise perturbs derivatives but not states") {
  const auto model = testutil::damped_oscillator_sls();
  SamplingSpec clean;
  clean.scheme = SamplingScheme::kUniformBox;
  clean.box = {{-3.0, 3.0}, {-3.0, 3.0}};
  clean.count = 50;
  clean.seed = 3;
  SamplingSpec noisy = clean;
  noisy.noise_std = 0.01;
  const Dataset a = generate_dataset(model, clean);
  const Dataset b = generate_dataset(model, noisy);
  for (int i = 0; i < a.size(); ++i) {
    CHECK((a.samples[i].z.array() == b.samples[i].z.array()).all());
    CHECK(!(a.samples[i].zdot.array() == b.samples[i].zdot.array()).all());
  }
}

TEST_CASE("trajectory sampling subsamples the integrated grid") {
  const auto model = testutil::damped_oscillator_sls();
  SamplingSpec spec;
  spec.scheme = SamplingScheme::kTrajectory;
  spec.initial_conditions = {vec2(1.0, 0.0), vec2(-2.0, 1.0)};
  spec.dt = 0.01;
  spec.horizon = 5.0;
  spec.count = 300;
  spec.seed = 9;
  const Dataset data = generate_dataset(model, spec);
  REQUIRE(data.size() == 300);
  CHECK(data.generator == "trajectory");
  for (const Sample& s : data.samples) {
    REQUIRE(s.true_mode.has_value());
    const Vec expected = eval_mode(model.modes[*s.true_mode], model.basis, s.z);
    CHECK((s.zdot - expected).lpNorm<Eigen::Infinity>() == 0.0);
  }

  SamplingSpec tiny = spec;
  tiny.count = 5000;  // more than two 501-point trajectories can provide
  CHECK_THROWS_AS(generate_dataset(model, tiny), std::invalid_argument);
}

TEST_CASE("sampling rejects malformed requests") {
  const auto model = testutil::damped_oscillator_sls();
  SamplingSpec spec;
  spec.scheme = SamplingScheme::kUniformBox;
  spec.box = {{-3.0, 3.0}, {-3.0, 3.0}};
  spec.count = 0;
  CHECK_THROWS_AS(generate_dataset(model, spec), std::invalid_argument);
  spec.count = 10;
  spec.box = {{3.0, -3.0}, {-3.0, 3.0}};
  CHECK_THROWS_AS(generate_dataset(model, spec), std::invalid_argument);
  spec.box = {{-3.0, 3.0}};
  CHECK_THROWS_AS(generate_dataset(model, spec), std::invalid_argument);
}
