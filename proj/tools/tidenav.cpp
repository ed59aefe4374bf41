#include <CLI11.hpp>
#include <iostream>

#include "tidenav/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Risk-aware vessel navigation among tide islands"};
  app.require_subcommand(1, 1);

  tidenav::ExperimentSpec spec;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  bool no_runs = false;

  auto common = [&](CLI::App* sub, bool sweeps) {
    sub->add_option("-c,--config", spec.config_path, "Scenario config file (key = value)");
    sub->add_option("-o,--out", spec.output_dir,
                    "Output directory (default: $TIDENAV_OUT, then ./tidenav_out)");
    sub->add_option("--seed", seed, "Override the config seed");
    if (sweeps) {
      sub->add_option("--repetitions", reps, "Override the number of Monte-Carlo runs");
      sub->add_option("--threads", spec.threads, "Worker threads (0: all cores)");
      sub->add_flag("--no-runs", no_runs, "Skip per-run trajectory CSVs and the audit log");
    }
  };

  auto* gen = app.add_subcommand("gen-field", "Write the depth field, islands and one timeline");
  common(gen, false);
  auto* run = app.add_subcommand("run", "Monte-Carlo batch of the configured controller");
  common(run, true);
  auto* st = app.add_subcommand("sweep-theta", "DR over a theta list plus SAA and CC baselines");
  common(st, true);
  st->add_option("--theta", spec.thetas, "Wasserstein radii (default: config theta_grid)")
      ->delimiter(',');
  auto* sn = app.add_subcommand("sweep-n", "DR, SAA and CC over a list of sample counts");
  common(sn, true);
  sn->add_option("--n", spec.ns, "Sample counts (default: config n_grid)")->delimiter(',');
  auto* ver = app.add_subcommand("verify", "Run the invariant suite");
  ver->add_option("--seed", seed, "Seed for the randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tidenav::kExitConfig;
  }

  spec.subcommand = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) spec.seed = seed;
  if (sub->get_option_no_throw("--repetitions") && sub->count("--repetitions")) {
    spec.repetitions = reps;
  }
  spec.write_runs = !no_runs;
  return tidenav::run_experiment(spec, std::cout, std::cerr);
}
