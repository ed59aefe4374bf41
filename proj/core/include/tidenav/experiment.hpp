#pragma once

// Subcommand driver behind the command-line front end.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tidenav {

struct ExperimentSpec {
  std::string subcommand;   // gen-field, run, sweep-theta, sweep-n, verify
  std::string config_path;  // empty: built-in defaults
  std::string output_dir;   // empty: $TIDENAV_OUT, then ./tidenav_out
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repetitions;
  std::vector<double> thetas;  // empty: config theta_grid
  std::vector<std::size_t> ns; // empty: config n_grid
  unsigned threads = 0;
  bool write_runs = true;      // per-run trajectory CSVs and the audit log
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Output directory after applying the environment override.
std::string resolve_output_dir(const std::string& requested);

int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace tidenav
