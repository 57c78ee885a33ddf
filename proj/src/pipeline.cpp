#include "switchid/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "switchid/assign.hpp"
#include "switchid/rng.hpp"
#include "switchid/simulate.hpp"

namespace switchid {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string());
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory " + path);
}

std::vector<ModeAssignment> assign_with(const Dataset& dataset,
                                        const SwitchingSystemModel& model,
                                        Relaxation relaxation, double tol) {
  switch (relaxation) {
    case Relaxation::kLp:
      return assign_lp(dataset, model.modes, model.basis, tol);
    case Relaxation::kSdp:
      return assign_sdp(dataset, model.modes, model.basis, tol);
    case Relaxation::kExact:
      return assign_exact(dataset, model.modes, model.basis);
  }
  throw std::invalid_argument("assign_with: unknown relaxation");
}

Json provenance_json(const std::string& config_hash, std::uint64_t seed) {
  Json out;
  out["config_hash"] = config_hash;
  out["seed"] = seed;
  return out;
}

Json rollout_json(const RolloutMetrics& m) {
  Json out;
  out["rmse"] = m.rmse;
  out["final_error"] = m.final_error;
  out["max_error"] = m.max_error;
  out["diverged"] = m.diverged;
  return out;
}

void write_text(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace

SimulateReport run_simulate(const ToolConfig& config,
                            const std::string& output_path) {
  const SwitchingSystemModel model = build_true_model(config.system);
  SimulateReport report;
  report.dataset = generate_dataset(model, config.sampling);
  report.mode_counts.assign(model.mode_count(), 0);
  for (const Sample& sample : report.dataset.samples) {
    if (sample.true_mode && *sample.true_mode < model.mode_count()) {
      ++report.mode_counts[*sample.true_mode];
    }
  }
  ensure_parent_dir(output_path);
  write_dataset_csv(output_path, report.dataset, config.hash);
  return report;
}

IdentifyReport run_identify(const ToolConfig& config,
                            const std::string& dataset_path,
                            const std::string& output_dir) {
  IdentifyReport report;
  const Dataset dataset = read_dataset_csv(dataset_path);
  report.dataset_seed = dataset.seed;
  report.result = identify(dataset, config.identify);
  ensure_dir(output_dir);
  const fs::path dir(output_dir);
  write_model_json((dir / "model.json").string(), report.result.model, config,
                   dataset.seed);
  write_history_csv((dir / "history.csv").string(), report.result.records,
                    config.hash, dataset.seed);
  return report;
}

SurfaceReport run_fit_surface(const ToolConfig& config,
                              const std::string& dataset_path,
                              const std::string& model_path,
                              const std::string& output_path) {
  const Dataset dataset = read_dataset_csv(dataset_path);
  const SwitchingSystemModel model = read_model_json(model_path);
  if (model.mode_count() < 2) {
    throw ConfigError("fit-surface: model has a single mode, no surface to fit");
  }
  if (model.state_dim() != dataset.n) {
    throw ConfigError("fit-surface: model/dataset dimension mismatch");
  }

  // Hardened labels of every sample under the stored model.
  const std::vector<ModeAssignment> assignments = assign_with(
      dataset, model, config.identify.relaxation, config.identify.solver_tol);
  std::vector<Vec> states;
  std::vector<int> labels;
  states.reserve(dataset.size());
  labels.reserve(dataset.size());
  for (int i = 0; i < dataset.size(); ++i) {
    states.push_back(dataset.samples[i].z);
    labels.push_back(assignments[i].hardened);
  }

  SurfaceReport report;
  report.dataset_seed = dataset.seed;
  const ModeBook modebook = make_modebook(model.mode_count());
  const std::vector<MarginCertificate> certificates =
      margin_certificate(states, labels, modebook, config.surface.degree,
                         config.surface.bound, config.identify.solver_tol);
  double t_min = certificates.front().t;
  double witness_l1_total = 0.0;
  for (const MarginCertificate& cert : certificates) {
    t_min = std::min(t_min, cert.t);
    witness_l1_total += cert.witness.lpNorm<1>();
    report.file.certificate_t.push_back(cert.t);
    report.file.certificate_witness.push_back(cert.witness);
  }
  report.separable = t_min > 0.0;
  report.file.admissible = admissible_epsilon(
      t_min, config.surface.sparsity, witness_l1_total, dataset.size(),
      modebook.surface_count());

  const SurfaceFitResult fit = fit_surfaces(states, labels, modebook,
                                            config.surface,
                                            config.identify.solver_tol);
  report.file.surfaces = fit.surfaces.normalized();
  report.file.modebook = modebook;
  report.file.margin_used = config.surface.margin;
  report.file.total_slack = fit.total_slack;
  report.file.l1_norms = fit.l1_norms;

  ensure_parent_dir(output_path);
  write_surfaces_json(output_path, report.file, config.hash, dataset.seed);
  return report;
}

EvaluateReport run_evaluate(const ToolConfig& config,
                            const std::string& model_path,
                            const std::string& surfaces_path,
                            const std::string& output_dir) {
  EvaluateReport report;
  const SwitchingSystemModel true_model = build_true_model(config.system);
  SwitchingSystemModel identified = read_model_json(model_path);

  if (!surfaces_path.empty() && fs::exists(surfaces_path)) {
    const SurfacesFile surfaces = read_surfaces_json(surfaces_path);
    identified.surfaces = surfaces.surfaces;
    identified.modebook = surfaces.modebook;
  } else if (identified.mode_count() > 1) {
    report.warnings.push_back(
        "no surfaces file: pointwise and rollout metrics skipped");
  }
  const bool simulable =
      identified.mode_count() == 1 || identified.surfaces.has_value();

  // Disjoint test set: fresh seed, same box, no measurement noise.
  SamplingSpec test_spec = config.sampling;
  test_spec.scheme = SamplingScheme::kUniformBox;
  test_spec.count = config.evaluate.test_count;
  test_spec.seed = config.evaluate.test_seed;
  test_spec.noise_std = 0.0;
  const Dataset test = generate_dataset(true_model, test_spec);

  if (simulable) {
    report.velocity_rmse = velocity_rmse(identified, test);
    std::vector<int> pred;
    std::vector<int> truth;
    pred.reserve(test.size());
    truth.reserve(test.size());
    for (const Sample& sample : test.samples) {
      pred.push_back(active_mode(identified, sample.z));
      truth.push_back(sample.true_mode.value());
    }
    const int mode_count =
        std::max(identified.mode_count(), true_model.mode_count());
    report.mode = mode_metrics(pred, truth, mode_count);

    std::vector<Vec> initial_conditions;
    Rng rng(config.evaluate.rollout_seed);
    for (int i = 0; i < config.evaluate.rollout_count; ++i) {
      Vec z0(true_model.state_dim());
      for (int k = 0; k < z0.size(); ++k) {
        z0(k) = rng.uniform(test_spec.box[k].first, test_spec.box[k].second);
      }
      initial_conditions.push_back(z0);
    }
    report.rollout =
        rollout_metrics(true_model, identified, initial_conditions,
                        config.evaluate.dt, config.evaluate.horizon);

    // Per-trajectory comparison CSVs.
    ensure_dir(output_dir);
    for (std::size_t i = 0; i < initial_conditions.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "rollout_%02zu.csv", i + 1);
      const std::string path = (fs::path(output_dir) / name).string();
      Trajectory truth_traj;
      Trajectory pred_traj;
      try {
        truth_traj = integrate(true_model, initial_conditions[i],
                               config.evaluate.dt, config.evaluate.horizon);
        pred_traj = integrate(identified, initial_conditions[i],
                              config.evaluate.dt, config.evaluate.horizon);
      } catch (const DivergenceError&) {
        report.warnings.push_back(std::string(name) +
                                  ": trajectory diverged, file skipped");
        continue;
      }
      std::ostringstream out;
      out << "# config=" << config.hash
          << " seed=" << config.evaluate.rollout_seed << "\n";
      out << "time";
      for (int k = 0; k < test.n; ++k) out << ",true_z_" << (k + 1);
      for (int k = 0; k < test.n; ++k) out << ",pred_z_" << (k + 1);
      out << ",error\n";
      for (int s = 0; s < truth_traj.size(); ++s) {
        out << format_double(truth_traj.times[s]);
        for (int k = 0; k < test.n; ++k) {
          out << "," << format_double(truth_traj.states[s](k));
        }
        for (int k = 0; k < test.n; ++k) {
          out << "," << format_double(pred_traj.states[s](k));
        }
        out << ","
            << format_double(
                   (truth_traj.states[s] - pred_traj.states[s]).norm())
            << "\n";
      }
      write_text(path, out.str());
    }
  }

  ensure_dir(output_dir);
  Json metrics;
  metrics["provenance"] =
      provenance_json(config.hash, config.evaluate.test_seed);
  metrics["test_count"] = test.size();
  metrics["velocity_rmse"] =
      report.velocity_rmse ? Json(*report.velocity_rmse) : Json(nullptr);
  if (report.mode) {
    metrics["mode_accuracy"] = report.mode->accuracy;
    metrics["miou"] = report.mode->miou;
  } else {
    metrics["mode_accuracy"] = nullptr;
    metrics["miou"] = nullptr;
  }
  if (report.rollout) {
    Json rollout = rollout_json(report.rollout->aggregate);
    Json per = Json::array();
    for (const RolloutMetrics& m : report.rollout->per_trajectory) {
      per.push_back(rollout_json(m));
    }
    rollout["per_trajectory"] = std::move(per);
    rollout["count"] = report.rollout->per_trajectory.size();
    metrics["rollout"] = std::move(rollout);
  } else {
    metrics["rollout"] = nullptr;
  }
  metrics["warnings"] = report.warnings;
  write_text((fs::path(output_dir) / "metrics.json").string(),
             metrics.dump(2) + "\n");
  return report;
}

}  // namespace switchid
