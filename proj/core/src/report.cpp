#include "tidenav/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace tidenav {

namespace {

std::string num(double v, const char* format = "%.10g") {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

const char* short_name(Method m) {
  switch (m) {
    case Method::DR: return "dr";
    case Method::SAA: return "saa";
    case Method::CC: return "cc";
  }
  return "dr";
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> cols = {"method",      "theta",      "n",
                                                "cost_mean",   "cost_std",   "margin_mean",
                                                "margin_std",  "collision_rate"};
  return cols;
}

void write_results_csv(std::ostream& out, std::span<const BatchResult> rows) {
  const auto& cols = results_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& b : rows) {
    out << to_string(b.method) << "," << num(b.theta, "%.6g") << "," << b.n << ","
        << num(b.cost_mean) << "," << num(b.cost_std) << "," << num(b.margin_mean) << ","
        << num(b.margin_std) << "," << num(b.collision_rate, "%.2f") << "\n";
  }
}

void write_timeline_csv(std::ostream& out, std::span<const ObstacleTimeline> timelines,
                        std::size_t steps, double sample_time_h) {
  std::size_t n = 0;
  for (const auto& tl : timelines) n = std::max(n, tl.sample_count());
  out << "island,t,realized_radius";
  for (std::size_t i = 1; i <= n; ++i) out << ",obs_" << i;
  out << "\n";
  for (const auto& tl : timelines) {
    for (std::size_t k = 0; k < std::min(steps, tl.steps()); ++k) {
      out << tl.id << "," << num(static_cast<double>(k) * sample_time_h, "%.4f") << ","
          << num(tl.realized_radius[k], "%.6f");
      for (double v : tl.observation_sets[k]) out << "," << num(v, "%.6f");
      out << "\n";
    }
  }
}

void write_trajectory_csv(std::ostream& out, const RunResult& run, double sample_time_h) {
  out << "t,y,u,clearance\n";
  const auto& tr = run.trace;
  for (std::size_t k = 0; k < tr.y.size(); ++k) {
    out << num(static_cast<double>(k) * sample_time_h, "%.4f") << "," << num(tr.y[k], "%.9f") << ",";
    if (k < tr.u.size()) out << num(tr.u[k], "%.9f");
    out << ",";
    if (k < run.clearance.size()) out << num(run.clearance[k], "%.9f");
    out << "\n";
  }
}

void write_audit_log(std::ostream& out, const RunResult& run, std::size_t run_index,
                     const std::string& label) {
  for (const auto& r : run.trace.log) {
    nlohmann::ordered_json j;
    j["batch"] = label;
    j["run"] = run_index;
    j["t"] = r.t;
    j["time_h"] = r.time_h;
    j["state"] = r.state;
    j["input"] = r.input;
    j["status"] = to_string(r.status);
    j["objective"] = finite_or_null(r.objective);
    j["active_pairs"] = r.diagnostics.active_pairs;
    j["infeasible_pairs"] = r.diagnostics.infeasible_pairs;
    j["softened_search"] = r.diagnostics.softened_search;
    j["nodes"] = r.diagnostics.search.nodes;
    j["qp_solves"] = r.diagnostics.search.qp_solves;
    j["qp_iterations"] = r.diagnostics.search.qp_iterations;
    j["kkt_residual"] = r.kkt_residual;
    j["max_slack"] = r.max_slack;
    out << j.dump() << "\n";
  }
  if (run.trace.aborted) {
    nlohmann::ordered_json j;
    j["batch"] = label;
    j["run"] = run_index;
    j["aborted"] = true;
    j["error"] = run.trace.error;
    out << j.dump() << "\n";
  }
}

void write_batch_summary(std::ostream& out, std::span<const BatchResult> batches) {
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  for (const auto& b : batches) {
    nlohmann::ordered_json j;
    j["label"] = batch_label(b);
    j["method"] = to_string(b.method);
    j["theta"] = b.theta;
    j["n"] = b.n;
    j["repetitions"] = b.repetitions;
    j["invalid"] = b.invalid;
    j["failed"] = b.failed;
    j["cost_mean"] = b.cost_mean;
    j["cost_std"] = b.cost_std;
    j["margin_mean"] = b.margin_mean;
    j["margin_std"] = b.margin_std;
    j["collision_rate"] = b.collision_rate;
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < b.runs.size(); ++i) {
      const auto& r = b.runs[i];
      nlohmann::ordered_json rj;
      rj["run"] = i;
      rj["total_cost"] = r.metrics.total_cost;
      rj["safety_margin"] = r.metrics.safety_margin;
      rj["collision"] = r.metrics.collision;
      rj["valid"] = r.metrics.valid;
      if (!r.error.empty()) rj["error"] = r.error;
      runs.push_back(std::move(rj));
    }
    j["runs"] = std::move(runs);
    all.push_back(std::move(j));
  }
  out << all.dump(2) << "\n";
}

void write_islands_csv(std::ostream& out, std::span<const Island> islands) {
  out << "id,center_km,footprint_lo,footprint_hi,catchment_lo,catchment_hi\n";
  for (const auto& is : islands) {
    out << is.id << "," << num(is.center_km, "%.6f") << "," << num(is.footprint.lo, "%.6f") << ","
        << num(is.footprint.hi, "%.6f") << "," << num(is.catchment.lo, "%.6f") << ","
        << num(is.catchment.hi, "%.6f") << "\n";
  }
}

std::string batch_label(const BatchResult& b) {
  std::string s = short_name(b.method);
  if (b.method == Method::DR) s += "_theta" + num(b.theta, "%g");
  s += "_n" + std::to_string(b.n);
  return s;
}

void write_time_space_svg(std::ostream& out, const Scenario& scenario,
                          std::span<const PlotTrace> traces) {
  const double width = 900, height = 560, left = 70, right = 170, top = 30, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  const std::size_t steps = scenario.steps();
  const double ts = scenario.config().sample_time_h;
  const double t_end = std::max(ts, static_cast<double>(steps) * ts);
  const auto& ext = scenario.field().extent();
  auto sx = [&](double t) { return left + pw * t / t_end; };
  auto sy = [&](double p) { return top + ph * (1.0 - (p - ext.lo_km) / ext.length()); };
  auto clamp_p = [&](double p) { return std::clamp(p, ext.lo_km, ext.hi_km); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width, "%.0f")
      << "\" height=\"" << num(height, "%.0f") << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << num(left, "%.1f") << "\" y=\"" << num(top, "%.1f") << "\" width=\""
      << num(pw, "%.1f") << "\" height=\"" << num(ph, "%.1f")
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double cell = pw / static_cast<double>(std::max<std::size_t>(steps, 1));
  for (std::size_t l = 0; l < scenario.islands().size(); ++l) {
    const RadiusProbe probe(scenario.field(), scenario.islands()[l], scenario.config().draft_m);
    const auto& pool = scenario.pools()[l];
    const double c = pool.center_km;
    std::string upper, lower;
    for (std::size_t k = 0; k <= steps && k < pool.steps(); ++k) {
      const double r = probe.noiseless_radius_at(scenario.grid().at(k));
      if (r > 0.0) {
        out << "<rect x=\"" << num(sx(static_cast<double>(k) * ts) - 0.5 * cell, "%.2f")
            << "\" y=\"" << num(sy(clamp_p(c + r)), "%.2f") << "\" width=\"" << num(cell, "%.2f")
            << "\" height=\"" << num(sy(clamp_p(c - r)) - sy(clamp_p(c + r)), "%.2f")
            << "\" fill=\"#b08d57\" fill-opacity=\"0.55\"/>\n";
      }
      const double env = *std::max_element(pool.values[k].begin(), pool.values[k].end());
      const std::string x = num(sx(static_cast<double>(k) * ts), "%.2f");
      upper += x + "," + num(sy(clamp_p(c + env)), "%.2f") + " ";
      lower += x + "," + num(sy(clamp_p(c - env)), "%.2f") + " ";
    }
    for (const auto* pts : {&upper, &lower}) {
      out << "<polyline points=\"" << *pts
          << "\" fill=\"none\" stroke=\"#7a5a2a\" stroke-dasharray=\"3,2\" stroke-width=\"1\"/>\n";
    }
  }

  std::string ref;
  for (std::size_t k = 0; k <= steps && k < scenario.reference().size(); ++k) {
    ref += num(sx(static_cast<double>(k) * ts), "%.2f") + "," +
           num(sy(scenario.reference()[k]), "%.2f") + " ";
  }
  out << "<polyline points=\"" << ref
      << "\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
  for (std::size_t i = 0; i < traces.size(); ++i) {
    std::string pts;
    for (std::size_t k = 0; k < traces[i].y.size(); ++k) {
      pts += num(sx(static_cast<double>(k) * ts), "%.2f") + "," + num(sy(traces[i].y[k]), "%.2f") + " ";
    }
    const char* colour = palette[i % 8];
    out << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"1.5\"/>\n";
    const double ly = top + 20.0 * static_cast<double>(i + 2);
    out << "<line x1=\"" << num(left + pw + 12, "%.1f") << "\" y1=\"" << num(ly, "%.1f")
        << "\" x2=\"" << num(left + pw + 36, "%.1f") << "\" y2=\"" << num(ly, "%.1f")
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(left + pw + 42, "%.1f") << "\" y=\"" << num(ly + 4, "%.1f") << "\">"
        << traces[i].label << "</text>\n";
  }
  const double ly = top + 20.0;
  out << "<line x1=\"" << num(left + pw + 12, "%.1f") << "\" y1=\"" << num(ly, "%.1f")
      << "\" x2=\"" << num(left + pw + 36, "%.1f") << "\" y2=\"" << num(ly, "%.1f")
      << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  out << "<text x=\"" << num(left + pw + 42, "%.1f") << "\" y=\"" << num(ly + 4, "%.1f")
      << "\">reference</text>\n";

  for (int i = 0; i <= 5; ++i) {
    const double t = t_end * i / 5.0;
    const double p = ext.lo_km + ext.length() * i / 5.0;
    out << "<text x=\"" << num(sx(t), "%.1f") << "\" y=\"" << num(top + ph + 18, "%.1f")
        << "\" text-anchor=\"middle\">" << num(t, "%.1f") << "</text>\n";
    out << "<text x=\"" << num(left - 8, "%.1f") << "\" y=\"" << num(sy(p) + 4, "%.1f")
        << "\" text-anchor=\"end\">" << num(p, "%.0f") << "</text>\n";
  }
  out << "<text x=\"" << num(left + pw / 2, "%.1f") << "\" y=\"" << num(height - 10, "%.1f")
      << "\" text-anchor=\"middle\">time (h)</text>\n";
  out << "<text x=\"16\" y=\"" << num(top + ph / 2, "%.1f")
      << "\" transform=\"rotate(-90 16 " << num(top + ph / 2, "%.1f")
      << ")\" text-anchor=\"middle\">position (km)</text>\n";
  out << "</svg>\n";
}

}  // namespace tidenav
