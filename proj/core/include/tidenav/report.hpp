#pragma once

// Output artifacts: result tables, per-run trajectories, timelines, audit log, batch
// summaries and the time-space SVG plot. Numbers are printed with fixed formats so
// identical inputs give byte-identical files.

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tidenav/sim.hpp"

namespace tidenav {

/// method,theta,n,cost_mean,cost_std,margin_mean,margin_std,collision_rate
const std::vector<std::string>& results_columns();
void write_results_csv(std::ostream& out, std::span<const BatchResult> rows);

/// island,t,realized_radius,obs_1..obs_N  (t in hours since the start of the run)
void write_timeline_csv(std::ostream& out, std::span<const ObstacleTimeline> timelines,
                        std::size_t steps, double sample_time_h);

/// t,y,u,clearance  (u is empty on the final row)
void write_trajectory_csv(std::ostream& out, const RunResult& run, double sample_time_h);

/// One JSON object per MPC solve.
void write_audit_log(std::ostream& out, const RunResult& run, std::size_t run_index,
                     const std::string& label);

void write_batch_summary(std::ostream& out, std::span<const BatchResult> batches);

/// id,center_km,footprint_lo,footprint_hi,catchment_lo,catchment_hi
void write_islands_csv(std::ostream& out, std::span<const Island> islands);

struct PlotTrace {
  std::string label;
  std::vector<double> y;
};

/// Time-space plot: noise-free island extents, the envelope of the largest observed
/// radius, the reference and closed-loop trajectories.
void write_time_space_svg(std::ostream& out, const Scenario& scenario,
                          std::span<const PlotTrace> traces);

/// Compact label such as "dr_theta0.0015_n11".
std::string batch_label(const BatchResult& b);

}  // namespace tidenav
