#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"
#include "switchid/rng.hpp"
#include "switchid/simulate.hpp"
#include "switchid/surface.hpp"

using namespace switchid;
using testutil::make_vec;

namespace {

std::vector<Vec> points_1d(std::initializer_list<double> xs) {
  std::vector<Vec> out;
  for (double x : xs) out.push_back(make_vec({x}));
  return out;
}

// Random polynomially separated instance: points in a box labeled by the
// sign of a hidden polynomial, with points near its zero set discarded.
struct SeparableInstance {
  std::vector<Vec> states;
  std::vector<int> labels;
  int degree = 1;
};

SeparableInstance random_separable(Rng& rng, int degree, int count,
                                   double gap) {
  const MonomialBasis basis = MonomialBasis::create(2, degree);
  Vec hidden(basis.size());
  do {
    for (int q = 0; q < basis.size(); ++q) hidden(q) = rng.uniform(-1.0, 1.0);
  } while (hidden.cwiseAbs().maxCoeff() < 0.3);
  SeparableInstance inst;
  inst.degree = degree;
  while (static_cast<int>(inst.states.size()) < count) {
    Vec z = make_vec({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    const double value = hidden.dot(eval_basis(basis, z));
    if (std::abs(value) < gap) continue;
    inst.states.push_back(z);
    inst.labels.push_back(value > 0.0 ? 0 : 1);
  }
  return inst;
}

}  // namespace

TEST_CASE("modebook codes follow the binary layout") {
  const ModeBook m1 = make_modebook(1);
  REQUIRE(m1.mode_count() == 1);
  REQUIRE(m1.surface_count() == 1);
  CHECK(m1.codes[0] == std::vector<int>{1});

  const ModeBook m2 = make_modebook(2);
  REQUIRE(m2.surface_count() == 1);
  CHECK(m2.codes[0] == std::vector<int>{1});
  CHECK(m2.codes[1] == std::vector<int>{-1});

  const ModeBook m3 = make_modebook(3);
  REQUIRE(m3.surface_count() == 2);
  CHECK(m3.codes[0] == std::vector<int>{1, 1});
  CHECK(m3.codes[1] == std::vector<int>{1, -1});
  CHECK(m3.codes[2] == std::vector<int>{-1, 1});

  const ModeBook m4 = make_modebook(4);
  REQUIRE(m4.surface_count() == 2);
  CHECK(m4.codes[3] == std::vector<int>{-1, -1});

  CHECK(make_modebook(5).surface_count() == 3);
  CHECK_THROWS_AS(make_modebook(0), std::invalid_argument);
}

TEST_CASE("two opposite 1-d points give the linear minimum-norm surface") {
  const std::vector<Vec> states = points_1d({1.0, -1.0});
  const std::vector<int> labels = {0, 1};
  SurfaceFitConfig config;
  config.degree = 1;
  config.margin = 0.01;
  config.sparsity = 0.01;
  config.bound = 10.0;
  const SurfaceFitResult fit =
      fit_surfaces(states, labels, make_modebook(2), config);
  REQUIRE(fit.surfaces.count() == 1);
  CHECK(fit.surfaces.surfaces[0](0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(fit.surfaces.surfaces[0](1) == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(fit.total_slack <= 1e-8);
  CHECK(fit.l1_norms[0] == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(fit.objective == doctest::Approx(1e-4).epsilon(1e-4));
}

TEST_CASE("uniformly signed points cost exactly the penalized margin") {
  const std::vector<Vec> states = points_1d({0.5, 1.5, 2.0});
  const std::vector<int> labels = {0, 0, 0};
  SurfaceFitConfig config;
  config.degree = 1;
  config.margin = 0.01;
  config.sparsity = 0.01;
  const SurfaceFitResult fit =
      fit_surfaces(states, labels, make_modebook(2), config);
  CHECK(fit.total_slack <= 1e-8);
  CHECK(fit.objective ==
        doctest::Approx(config.sparsity * config.margin).epsilon(1e-4));
}

TEST_CASE("input validation rejects malformed surface fits") {
  const ModeBook book = make_modebook(2);
  SurfaceFitConfig config;
  CHECK_THROWS_AS(fit_surfaces({}, {}, book, config), std::invalid_argument);
  const std::vector<Vec> states = points_1d({1.0});
  CHECK_THROWS_AS(fit_surfaces(states, {2}, book, config),
                  std::invalid_argument);
  SurfaceFitConfig bad = config;
  bad.margin = 0.0;
  CHECK_THROWS_AS(fit_surfaces(states, {0}, book, bad),
                  std::invalid_argument);
  bad = config;
  bad.bound = -1.0;
  CHECK_THROWS_AS(fit_surfaces(states, {0}, book, bad),
                  std::invalid_argument);
}

TEST_CASE("margin certificate saturates the box on clean 1-d data") {
  const std::vector<Vec> states = points_1d({1.0, -1.0});
  const std::vector<int> labels = {0, 1};
  const auto certs =
      margin_certificate(states, labels, make_modebook(2), 1, 10.0);
  REQUIRE(certs.size() == 1);
  CHECK(certs[0].t == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(certs[0].witness(0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(certs[0].witness(1) == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("a duplicated point with both signs is certified inseparable") {
  const std::vector<Vec> states = points_1d({0.7, 0.7});
  const std::vector<int> labels = {0, 1};
  const auto certs =
      margin_certificate(states, labels, make_modebook(2), 2, 10.0);
  REQUIRE(certs.size() == 1);
  CHECK(certs[0].t <= 0.0);
}

TEST_CASE("admissible margin interval matches the closed form") {
  const EpsilonInterval interval = admissible_epsilon(10.0, 0.01, 10.0, 2, 1);
  CHECK_FALSE(interval.empty);
  CHECK(interval.lo == doctest::Approx(0.05));
  CHECK(interval.hi == doctest::Approx(10.0));

  const EpsilonInterval unpenalized = admissible_epsilon(10.0, 0.0, 10.0, 2, 1);
  CHECK_FALSE(unpenalized.empty);
  CHECK(unpenalized.lo == 0.0);
  CHECK(unpenalized.hi == doctest::Approx(10.0));

  CHECK(admissible_epsilon(10.0, 1.0, 10.0, 1, 1).empty);
  CHECK(admissible_epsilon(0.0, 0.01, 10.0, 2, 1).empty);
  CHECK(admissible_epsilon(-1.0, 0.0, 0.0, 2, 1).empty);
  CHECK_THROWS_AS(admissible_epsilon(1.0, 0.01, 1.0, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("margins inside the admissible interval yield zero slack") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    const int degree = 1 + static_cast<int>(rng.below(2));
    const SeparableInstance inst = random_separable(rng, degree, 40, 0.05);
    const ModeBook book = make_modebook(2);
    const double eta = 10.0;
    const auto certs =
        margin_certificate(inst.states, inst.labels, book, degree, eta);
    REQUIRE(certs.size() == 1);
    CHECK(certs[0].t > 0.0);
    CHECK(certs[0].witness.cwiseAbs().maxCoeff() <= eta + 1e-9);

    const double beta = 0.01;
    const double s = certs[0].witness.lpNorm<1>();
    const EpsilonInterval interval = admissible_epsilon(
        certs[0].t, beta, s, static_cast<int>(inst.states.size()), 1);
    REQUIRE_FALSE(interval.empty);
    const double margin = interval.lo + 0.25 * (interval.hi - interval.lo);

    SurfaceFitConfig config;
    config.degree = degree;
    config.margin = margin;
    config.sparsity = beta;
    config.bound = eta;
    const SurfaceFitResult fit =
        fit_surfaces(inst.states, inst.labels, book, config);
    CHECK(fit.total_slack <= 1e-8);
    CHECK(fit.l1_norms[0] > 1e-6);
    // Feasible comparisons: the scaled witness and the zero surface.
    const double point_cost =
        static_cast<double>(inst.states.size()) * margin;
    CHECK(fit.objective <= std::min(beta * s, point_cost) + 1e-6);
  }
}

TEST_CASE("arbitrary labels keep the objective under the zero-surface cost") {
  Rng rng(31);
  std::vector<Vec> states;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    states.push_back(make_vec({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}));
    labels.push_back(static_cast<int>(rng.below(4)));
  }
  SurfaceFitConfig config;
  config.degree = 1;
  config.margin = 0.05;
  config.sparsity = 0.02;
  const ModeBook book = make_modebook(4);
  const SurfaceFitResult fit = fit_surfaces(states, labels, book, config);
  const double zero_cost =
      static_cast<double>(states.size()) * book.surface_count() * config.margin;
  CHECK(fit.objective <= zero_cost + 1e-6);
}

TEST_CASE("per-surface solves match the monolithic program") {
  Rng rng(77);
  std::vector<Vec> states;
  std::vector<int> labels;
  const int count = 12;
  for (int i = 0; i < count; ++i) {
    states.push_back(make_vec({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}));
    labels.push_back(static_cast<int>(rng.below(4)));
  }
  const ModeBook book = make_modebook(4);
  SurfaceFitConfig config;
  config.degree = 1;
  config.margin = 0.05;
  config.sparsity = 0.02;
  const SurfaceFitResult fit = fit_surfaces(states, labels, book, config);

  // One joint program over both surfaces: a_1, a_2, all slacks, all norms.
  const MonomialBasis basis = MonomialBasis::create(2, config.degree);
  const int p = basis.size();
  const int l_count = book.surface_count();
  const int n_slack = count * l_count;
  const int nvars = l_count * p + n_slack + l_count * p;
  LinearProgramSpec lp = LinearProgramSpec::make(nvars);
  const int slack0 = l_count * p;
  const int zeta0 = slack0 + n_slack;
  for (int i = 0; i < n_slack; ++i) lp.c(slack0 + i) = 1.0;
  for (int m = 0; m < l_count * p; ++m) lp.c(zeta0 + m) = config.sparsity;
  std::vector<Eigen::Triplet<double>> trips;
  int row = 0;
  for (int l = 0; l < l_count; ++l) {
    for (int i = 0; i < count; ++i) {
      const double sign = book.codes[labels[i]][l];
      const Vec phi = eval_basis(basis, states[i]);
      for (int q = 0; q < p; ++q) trips.emplace_back(row, l * p + q, -sign * phi(q));
      trips.emplace_back(row, slack0 + l * count + i, -1.0);
      ++row;
    }
  }
  for (int m = 0; m < l_count * p; ++m) {
    trips.emplace_back(row, m, 1.0);
    trips.emplace_back(row, zeta0 + m, -1.0);
    ++row;
    trips.emplace_back(row, m, -1.0);
    trips.emplace_back(row, zeta0 + m, -1.0);
    ++row;
  }
  lp.a_ub.resize(row, nvars);
  lp.a_ub.setFromTriplets(trips.begin(), trips.end());
  lp.b_ub = Vec::Zero(row);
  for (int i = 0; i < n_slack; ++i) lp.b_ub(i) = -config.margin;
  const double inf = std::numeric_limits<double>::infinity();
  for (int m = 0; m < l_count * p; ++m) {
    lp.bounds[m] = {-config.bound, config.bound};
  }
  for (int v = slack0; v < nvars; ++v) lp.bounds[v] = {0.0, inf};
  const SolveStatus joint = solve_lp(lp);
  REQUIRE(joint.status == SolveOutcome::kOptimal);
  CHECK(fit.objective == doctest::Approx(joint.objective).epsilon(1e-6));
}

TEST_CASE("region classification is invariant under normalization") {
  Rng rng(93);
  const SeparableInstance inst = random_separable(rng, 2, 60, 0.05);
  SurfaceFitConfig config;
  config.degree = 2;
  config.margin = 0.01;
  config.sparsity = 0.01;
  const ModeBook book = make_modebook(2);
  const SurfaceFitResult fit =
      fit_surfaces(inst.states, inst.labels, book, config);
  const SurfaceSet scaled = fit.surfaces.normalized();
  for (int i = 0; i < 25; ++i) {
    const Vec z = make_vec({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    CHECK(region_mode(fit.surfaces, book, z) == region_mode(scaled, book, z));
  }
}

TEST_CASE("true labels recover the damped-oscillator switching line") {
  const auto model = testutil::damped_oscillator_sls();
  SamplingSpec spec;
  spec.box = {{-2.0, 2.0}, {-2.0, 2.0}};
  spec.count = 200;
  spec.seed = 77;
  const Dataset data = generate_dataset(model, spec);
  std::vector<Vec> states;
  std::vector<int> labels;
  for (const Sample& sample : data.samples) {
    states.push_back(sample.z);
    labels.push_back(sample.true_mode.value());
  }
  SurfaceFitConfig config;
  config.degree = 2;
  config.margin = 1e-2;
  config.sparsity = 1e-2;
  config.bound = 10.0;
  const SurfaceFitResult fit =
      fit_surfaces(states, labels, make_modebook(2), config);
  const Vec a = fit.surfaces.normalized().surfaces[0];
  const int x_index = fit.surfaces.basis.linear_index(0);
  CHECK(std::abs(a(x_index)) / a.lpNorm<1>() >= 0.95);
  // The classifier reproduces the labels away from the surface.
  int agree = 0;
  for (int i = 0; i < data.size(); ++i) {
    if (region_mode(fit.surfaces, make_modebook(2), states[i]) == labels[i]) {
      ++agree;
    }
  }
  CHECK(agree >= data.size() - 2);
}
