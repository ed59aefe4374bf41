#pragma once

// Plain-text scenario configuration: one `key = value` per line, `#` starts a comment.
//
//   extent_km     = 0 72             lo hi
//   bathymetry_m  = 9                constant, or knots "p:v, p:v, ..."
//   shoals        = 20:1.2:0.6:200   center:rise:half_width[:shape], comma separated
//   reference     = 0:0, 6:60        waypoints t_h:p_km
//   theta_grid    = 0.001, 0.002
//
// Every key is optional; unknown keys, duplicates and malformed values are errors.

#include <stdexcept>
#include <string>
#include <vector>

#include "tidenav/sim.hpp"

namespace tidenav {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config(const std::string& path);

/// Writes every key, doubles at full precision, so the result parses back to an equal config.
std::string serialize_config(const ScenarioConfig& config);

/// Documented keys in serialization order.
const std::vector<std::string>& config_keys();

}  // namespace tidenav
