#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "switchid/pipeline.hpp"

using namespace switchid;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string relaxation;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, const char* seed_help) {
  cmd->add_option("--config", flags.config, "Configuration JSON file")
      ->required();
  cmd->add_option("--seed", flags.seed, seed_help);
  cmd->add_option("--relaxation", flags.relaxation,
                  "Assignment relaxation: lp, sdp, or exact")
      ->check(CLI::IsMember({"lp", "sdp", "exact"}));
  cmd->add_flag("--quiet", flags.quiet, "Suppress progress output");
}

ToolConfig load_with_overrides(const CommonFlags& flags) {
  ToolConfig config = load_config(flags.config);
  if (flags.relaxation == "lp") {
    config.identify.relaxation = Relaxation::kLp;
  } else if (flags.relaxation == "sdp") {
    config.identify.relaxation = Relaxation::kSdp;
  } else if (flags.relaxation == "exact") {
    config.identify.relaxation = Relaxation::kExact;
  }
  return config;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Identification of state-dependent switching dynamical systems"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  std::string sim_output;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Sample a dataset from the configured ground-truth system");
  add_common(sim, sim_flags, "Override the sampling seed");
  sim->add_option("--output", sim_output, "Output dataset CSV path")
      ->required();
  sim->callback([&] {
    ToolConfig config = load_with_overrides(sim_flags);
    if (sim_flags.seed) config.sampling.seed = *sim_flags.seed;
    const SimulateReport report = run_simulate(config, sim_output);
    if (!sim_flags.quiet) {
      std::string balance;
      for (std::size_t j = 0; j < report.mode_counts.size(); ++j) {
        if (j > 0) balance += "/";
        balance += std::to_string(report.mode_counts[j]);
      }
      std::printf("wrote %s: N=%d modes=%s seed=%llu\n", sim_output.c_str(),
                  report.dataset.size(), balance.c_str(),
                  static_cast<unsigned long long>(report.dataset.seed));
    }
  });

  CommonFlags id_flags;
  std::string id_dataset;
  std::string id_output;
  CLI::App* ident = app.add_subcommand(
      "identify", "Alternate assignment and dynamics fitting on a dataset");
  add_common(ident, id_flags, "Override the random-init seed");
  ident->add_option("--dataset", id_dataset, "Input dataset CSV")->required();
  ident->add_option("--output", id_output, "Output directory")->required();
  ident->callback([&] {
    ToolConfig config = load_with_overrides(id_flags);
    if (id_flags.seed) config.identify.init_seed = *id_flags.seed;
    const IdentifyReport report = run_identify(config, id_dataset, id_output);
    if (!id_flags.quiet) {
      const IterationRecord& last = report.result.records.back();
      std::printf(
          "identified %d modes in %d iterations (%s, final cost %g)\n",
          config.identify.mode_count, last.iteration,
          report.result.converged ? "converged" : "iteration limit",
          last.cost);
      std::printf("wrote %s/model.json and %s/history.csv\n",
                  id_output.c_str(), id_output.c_str());
    }
  });

  CommonFlags surf_flags;
  std::string surf_dataset;
  std::string surf_model;
  std::string surf_output;
  CLI::App* surf = app.add_subcommand(
      "fit-surface", "Recover switching surfaces from a fitted model");
  add_common(surf, surf_flags, "(unused by this command)");
  surf->add_option("--dataset", surf_dataset, "Input dataset CSV")->required();
  surf->add_option("--model", surf_model, "Fitted model JSON")->required();
  surf->add_option("--output", surf_output, "Output surfaces JSON path")
      ->required();
  surf->callback([&] {
    const ToolConfig config = load_with_overrides(surf_flags);
    const SurfaceReport report =
        run_fit_surface(config, surf_dataset, surf_model, surf_output);
    if (!report.separable) {
      std::cerr << "warning: labels not certificate-separable at degree "
                << config.surface.degree << " (min margin "
                << *std::min_element(report.file.certificate_t.begin(),
                                     report.file.certificate_t.end())
                << "); fitting with configured margin "
                << config.surface.margin << " anyway\n";
    }
    if (!surf_flags.quiet) {
      std::string ts;
      for (std::size_t l = 0; l < report.file.certificate_t.size(); ++l) {
        if (l > 0) ts += ", ";
        ts += format_double(report.file.certificate_t[l]);
      }
      const std::string interval =
          report.file.admissible.empty
              ? "empty"
              : "(" + format_double(report.file.admissible.lo) + ", " +
                    format_double(report.file.admissible.hi) + "]";
      std::printf("certificate t=[%s]; admissible margin %s; total slack %g\n",
                  ts.c_str(), interval.c_str(), report.file.total_slack);
      std::printf("wrote %s\n", surf_output.c_str());
    }
  });

  CommonFlags eval_flags;
  std::string eval_model;
  std::string eval_surfaces;
  std::string eval_output;
  CLI::App* eval = app.add_subcommand(
      "evaluate", "Score a fitted model against the configured ground truth");
  add_common(eval, eval_flags, "Override the test-set seed");
  eval->add_option("--model", eval_model, "Fitted model JSON")->required();
  eval->add_option("--surfaces", eval_surfaces,
                   "Fitted surfaces JSON (omit to skip pointwise metrics)");
  eval->add_option("--output", eval_output, "Output directory")->required();
  eval->callback([&] {
    ToolConfig config = load_with_overrides(eval_flags);
    if (eval_flags.seed) {
      config.evaluate.test_seed = *eval_flags.seed;
      config.evaluate.rollout_seed = *eval_flags.seed + 1;
    }
    const EvaluateReport report =
        run_evaluate(config, eval_model, eval_surfaces, eval_output);
    print_warnings(report.warnings);
    if (!eval_flags.quiet) {
      if (report.velocity_rmse) {
        std::printf("velocity rmse %g\n", *report.velocity_rmse);
      }
      if (report.mode) {
        std::printf("mode accuracy %g, mIoU %g\n", report.mode->accuracy,
                    report.mode->miou);
      }
      if (report.rollout) {
        std::printf("rollout rmse %g, final %g, max %g over %zu trajectories\n",
                    report.rollout->aggregate.rmse,
                    report.rollout->aggregate.final_error,
                    report.rollout->aggregate.max_error,
                    report.rollout->per_trajectory.size());
      }
      std::printf("wrote %s/metrics.json\n", eval_output.c_str());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CapacityError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
