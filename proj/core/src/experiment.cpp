#include "tidenav/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "tidenav/config.hpp"
#include "tidenav/error.hpp"
#include "tidenav/report.hpp"
#include "tidenav/verify.hpp"

namespace tidenav {

namespace fs = std::filesystem;

namespace {

class RuntimeFailure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_file(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot write " + p.string());
  return f;
}

void print_row(std::ostream& out, const BatchResult& b) {
  char line[200];
  std::snprintf(line, sizeof line, "%-8s theta=%-8g N=%-3zu cost=%.4g+-%.3g margin=%.4f+-%.4f collisions=%.1f%%%s",
                to_string(b.method).c_str(), b.theta, b.n, b.cost_mean, b.cost_std, b.margin_mean,
                b.margin_std, b.collision_rate, b.failed ? "  FAILED" : "");
  out << line << "\n";
}

struct Batches {
  std::vector<ControllerSpec> specs;
  std::vector<std::size_t> ns;
};

Batches plan(const ExperimentSpec& spec, const ScenarioConfig& c) {
  Batches b;
  auto add = [&](Method m, double theta, std::size_t n) {
    ControllerSpec s = c.controller;
    s.method = m;
    s.risk.theta = m == Method::DR ? theta : 0.0;
    b.specs.push_back(s);
    b.ns.push_back(n);
  };
  if (spec.subcommand == "run") {
    add(c.controller.method, c.controller.risk.theta, c.n_samples);
  } else if (spec.subcommand == "sweep-theta") {
    const auto thetas = spec.thetas.empty() ? c.theta_grid : spec.thetas;
    if (thetas.empty()) throw ConfigError("sweep-theta needs a nonempty theta list");
    for (double th : thetas) {
      if (!(th >= 0.0)) throw ConfigError("theta values must be non-negative");
      add(Method::DR, th, c.n_samples);
    }
    add(Method::SAA, 0.0, c.n_samples);
    add(Method::CC, 0.0, c.n_samples);
  } else if (spec.subcommand == "sweep-n") {
    const auto ns = spec.ns.empty() ? c.n_grid : spec.ns;
    if (ns.empty()) throw ConfigError("sweep-n needs a nonempty N list");
    for (auto n : ns) {
      if (n < 1) throw ConfigError("N values must be at least 1");
      if (n >= c.pool_size) throw ConfigError("N must be smaller than pool_size");
    }
    for (Method m : {Method::DR, Method::SAA, Method::CC}) {
      for (auto n : ns) add(m, c.controller.risk.theta, n);
    }
  }
  return b;
}

void write_config(const fs::path& dir, const ScenarioConfig& c) {
  auto f = open_file(dir / "config.txt");
  f << serialize_config(c);
}

int gen_field(const ScenarioConfig& c, const fs::path& dir, std::ostream& out) {
  const Scenario scenario(c);
  write_config(dir, c);
  {
    auto f = open_file(dir / "islands.csv");
    write_islands_csv(f, scenario.islands());
  }
  {
    auto f = open_file(dir / "bathymetry.csv");
    f << "p_km,bed_m,amplitude_m,phase_rad\n";
    for (double p : scenario.field().grid()) {
      char line[128];
      std::snprintf(line, sizeof line, "%.4f,%.6f,%.6f,%.6f\n", p, scenario.field().bed_depth(p),
                    c.field.amplitude(p), c.field.phase(p));
      f << line;
    }
  }
  {
    const auto timelines = sample_timelines(scenario, c.n_samples, repetition_seed(c.seed, 0));
    auto f = open_file(dir / "timeline.csv");
    write_timeline_csv(f, timelines, scenario.steps() + 1, c.sample_time_h);
  }
  {
    auto f = open_file(dir / "field.svg");
    write_time_space_svg(f, scenario, {});
  }
  out << scenario.islands().size() << " islands, " << scenario.steps() << " steps; wrote "
      << dir.string() << "\n";
  return kExitOk;
}

int simulate_batches(const ExperimentSpec& spec, const ScenarioConfig& c, const fs::path& dir,
                     std::ostream& out) {
  const auto batches = plan(spec, c);
  const Scenario scenario(c);
  write_config(dir, c);
  {
    const auto timelines = sample_timelines(scenario, c.n_samples, repetition_seed(c.seed, 0));
    auto f = open_file(dir / "timeline.csv");
    write_timeline_csv(f, timelines, scenario.steps() + 1, c.sample_time_h);
  }
  std::optional<std::ofstream> audit;
  if (spec.write_runs) audit.emplace(open_file(dir / "audit.jsonl"));

  std::vector<BatchResult> results;
  std::vector<PlotTrace> traces;
  bool failed = false;
  for (std::size_t i = 0; i < batches.specs.size(); ++i) {
    auto b = monte_carlo(scenario, batches.specs[i], batches.ns[i], c.repetitions, c.seed,
                         spec.threads);
    const auto label = batch_label(b);
    print_row(out, b);
    failed = failed || b.failed;
    if (spec.write_runs) {
      const fs::path runs = dir / "runs" / label;
      fs::create_directories(runs);
      for (std::size_t r = 0; r < b.runs.size(); ++r) {
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu.csv", r);
        auto f = open_file(runs / name);
        write_trajectory_csv(f, b.runs[r], c.sample_time_h);
        write_audit_log(*audit, b.runs[r], r, label);
      }
    }
    if (!b.runs.empty()) traces.push_back({label, b.runs.front().trace.y});
    for (auto& r : b.runs) {
      r.trace.log.clear();
      r.timelines.clear();
    }
    results.push_back(std::move(b));

    // Rewritten after every batch so a later failure leaves the finished rows behind.
    auto csv = open_file(dir / "results.csv");
    write_results_csv(csv, results);
    auto json = open_file(dir / "summary.json");
    write_batch_summary(json, results);
  }
  auto svg = open_file(dir / "plot.svg");
  write_time_space_svg(svg, scenario, traces);
  if (failed) {
    out << "one or more batches had more than 10% invalid runs\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

std::string resolve_output_dir(const std::string& requested) {
  if (!requested.empty()) return requested;
  if (const char* env = std::getenv("TIDENAV_OUT"); env && *env) return env;
  return "tidenav_out";
}

int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> known = {"gen-field", "run", "sweep-theta", "sweep-n",
                                                 "verify"};
  if (std::find(known.begin(), known.end(), spec.subcommand) == known.end()) {
    err << "error: unknown subcommand '" << spec.subcommand << "'\n";
    return kExitConfig;
  }
  try {
    if (spec.subcommand == "verify") {
      const auto results = run_invariant_suite(spec.seed.value_or(1), &out);
      const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
      out << (ok ? "all invariants hold\n" : "invariant violations found\n");
      return ok ? kExitOk : kExitRuntime;
    }

    ScenarioConfig c = spec.config_path.empty() ? parse_config_text("") : parse_config(spec.config_path);
    if (spec.seed) c.seed = *spec.seed;
    if (spec.repetitions) c.repetitions = *spec.repetitions;
    try {
      c.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("invalid configuration: ") + e.what());
    }

    const fs::path dir = resolve_output_dir(spec.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      err << "error: cannot create output directory '" << dir.string() << "'\n";
      return kExitConfig;
    }
    if (spec.subcommand == "gen-field") return gen_field(c, dir, out);
    return simulate_batches(spec, c, dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace tidenav
