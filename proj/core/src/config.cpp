#include "tidenav/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tidenav/error.hpp"

namespace tidenav {

ConfigError::ConfigError(const std::string& msg, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::vector<double> number_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(item));
  return out;
}

PiecewiseLinear profile(const std::string& s) {
  if (s.find(':') == std::string::npos) return PiecewiseLinear(to_double(s));
  std::vector<std::pair<double, double>> knots;
  for (const auto& item : split(s, ',')) {
    const auto f = split(item, ':');
    if (f.size() != 2) throw ConfigError("expected position:value knot, got '" + item + "'");
    knots.emplace_back(to_double(f[0]), to_double(f[1]));
  }
  try {
    return PiecewiseLinear(std::move(knots));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

// Shortest representation that parses back to the same double.
std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_profile(const PiecewiseLinear& f) {
  const auto& k = f.knots();
  if (k.size() == 1 && k.front().first == 0.0) return fmt(k.front().second);
  std::string out;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) out += ", ";
    out += fmt(k[i].first) + ":" + fmt(k[i].second);
  }
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;
using Getter = std::function<std::string(const ScenarioConfig&)>;

struct Key {
  std::string name;
  Setter set;
  Getter get;
};

Key real(std::string name, double ScenarioConfig::*member) {
  return {std::move(name), [member](ScenarioConfig& c, const std::string& v) { c.*member = to_double(v); },
          [member](const ScenarioConfig& c) { return fmt(c.*member); }};
}

Key count(std::string name, std::size_t ScenarioConfig::*member) {
  return {std::move(name),
          [member](ScenarioConfig& c, const std::string& v) {
            c.*member = static_cast<std::size_t>(to_uint(v));
          },
          [member](const ScenarioConfig& c) { return std::to_string(c.*member); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"extent_km",
       [](ScenarioConfig& c, const std::string& v) {
         const auto w = words(v);
         if (w.size() != 2) throw ConfigError("extent_km needs two numbers: lo hi");
         c.field.extent = {to_double(w[0]), to_double(w[1])};
       },
       [](const ScenarioConfig& c) {
         return fmt(c.field.extent.lo_km) + " " + fmt(c.field.extent.hi_km);
       }},
      {"grid_km", [](ScenarioConfig& c, const std::string& v) { c.field.grid_km = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.field.grid_km); }},
      {"period_h", [](ScenarioConfig& c, const std::string& v) { c.field.period_h = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.field.period_h); }},
      {"noise_sd_m",
       [](ScenarioConfig& c, const std::string& v) { c.field.noise_sd_m = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.field.noise_sd_m); }},
      {"radius_noise_sd_km",
       [](ScenarioConfig& c, const std::string& v) { c.field.radius_noise_sd_km = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.field.radius_noise_sd_km); }},
      {"field_seed", [](ScenarioConfig& c, const std::string& v) { c.field.seed = to_uint(v); },
       [](const ScenarioConfig& c) { return std::to_string(c.field.seed); }},
      {"bathymetry_m",
       [](ScenarioConfig& c, const std::string& v) { c.field.bathymetry = profile(v); },
       [](const ScenarioConfig& c) { return fmt_profile(c.field.bathymetry); }},
      {"amplitude_m",
       [](ScenarioConfig& c, const std::string& v) { c.field.amplitude = profile(v); },
       [](const ScenarioConfig& c) { return fmt_profile(c.field.amplitude); }},
      {"phase_rad", [](ScenarioConfig& c, const std::string& v) { c.field.phase = profile(v); },
       [](const ScenarioConfig& c) { return fmt_profile(c.field.phase); }},
      {"shoals",
       [](ScenarioConfig& c, const std::string& v) {
         c.field.shoals.clear();
         if (v.empty()) return;
         for (const auto& item : split(v, ',')) {
           const auto f = split(item, ':');
           if (f.size() != 3 && f.size() != 4) {
             throw ConfigError("shoal must be center:rise:half_width[:shape], got '" + item + "'");
           }
           Shoal s{to_double(f[0]), to_double(f[1]), to_double(f[2]), 2.0};
           if (f.size() == 4) s.shape = to_double(f[3]);
           c.field.shoals.push_back(s);
         }
       },
       [](const ScenarioConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.field.shoals.size(); ++i) {
           const auto& s = c.field.shoals[i];
           if (i) out += ", ";
           out += fmt(s.center_km) + ":" + fmt(s.rise_m) + ":" + fmt(s.half_width_km) + ":" +
                  fmt(s.shape);
         }
         return out;
       }},
      real("start_h", &ScenarioConfig::start_h),
      real("draft_m", &ScenarioConfig::draft_m),
      {"reference",
       [](ScenarioConfig& c, const std::string& v) {
         c.reference.clear();
         for (const auto& item : split(v, ',')) {
           const auto f = split(item, ':');
           if (f.size() != 2) throw ConfigError("waypoint must be t_h:p_km, got '" + item + "'");
           c.reference.push_back({to_double(f[0]), to_double(f[1])});
         }
       },
       [](const ScenarioConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.reference.size(); ++i) {
           if (i) out += ", ";
           out += fmt(c.reference[i].t_h) + ":" + fmt(c.reference[i].p_km);
         }
         return out;
       }},
      real("sample_time_h", &ScenarioConfig::sample_time_h),
      {"horizon",
       [](ScenarioConfig& c, const std::string& v) {
         const auto h = to_uint(v);
         if (h > 1000) throw ConfigError("horizon is unreasonably large");
         c.horizon = static_cast<int>(h);
       },
       [](const ScenarioConfig& c) { return std::to_string(c.horizon); }},
      {"q", [](ScenarioConfig& c, const std::string& v) { c.weights.q = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.weights.q); }},
      {"p", [](ScenarioConfig& c, const std::string& v) { c.weights.p = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.weights.p); }},
      {"r", [](ScenarioConfig& c, const std::string& v) { c.weights.r = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.weights.r); }},
      real("u_min", &ScenarioConfig::u_min),
      real("u_max", &ScenarioConfig::u_max),
      real("slack_penalty", &ScenarioConfig::slack_penalty),
      {"initial_input",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "auto") {
           c.initial_input.reset();
         } else {
           c.initial_input = to_double(v);
         }
       },
       [](const ScenarioConfig& c) {
         return c.initial_input ? fmt(*c.initial_input) : std::string("auto");
       }},
      {"method",
       [](ScenarioConfig& c, const std::string& v) {
         try {
           c.controller.method = method_from_string(v);
         } catch (const DomainError& e) {
           throw ConfigError(e.what());
         }
       },
       [](const ScenarioConfig& c) {
         switch (c.controller.method) {
           case Method::DR: return std::string("dr");
           case Method::SAA: return std::string("saa");
           case Method::CC: return std::string("cc");
         }
         return std::string("dr");
       }},
      {"alpha", [](ScenarioConfig& c, const std::string& v) { c.controller.risk.alpha = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.controller.risk.alpha); }},
      {"delta", [](ScenarioConfig& c, const std::string& v) { c.controller.risk.delta = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.controller.risk.delta); }},
      {"theta", [](ScenarioConfig& c, const std::string& v) { c.controller.risk.theta = to_double(v); },
       [](const ScenarioConfig& c) { return fmt(c.controller.risk.theta); }},
      count("n_samples", &ScenarioConfig::n_samples),
      count("repetitions", &ScenarioConfig::repetitions),
      count("pool_size", &ScenarioConfig::pool_size),
      {"seed", [](ScenarioConfig& c, const std::string& v) { c.seed = to_uint(v); },
       [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
      {"theta_grid", [](ScenarioConfig& c, const std::string& v) { c.theta_grid = number_list(v); },
       [](const ScenarioConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.theta_grid.size(); ++i) {
           if (i) out += ", ";
           out += fmt(c.theta_grid[i]);
         }
         return out;
       }},
      {"n_grid",
       [](ScenarioConfig& c, const std::string& v) {
         c.n_grid.clear();
         for (const auto& item : split(v, ',')) c.n_grid.push_back(static_cast<std::size_t>(to_uint(item)));
       },
       [](const ScenarioConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
           if (i) out += ", ";
           out += std::to_string(c.n_grid[i]);
         }
         return out;
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : keys()) n.push_back(k.name);
    return n;
  }();
  return names;
}

ScenarioConfig parse_config_text(const std::string& text) {
  std::map<std::string, const Key*> index;
  for (const auto& k : keys()) index[k.name] = &k;

  ScenarioConfig config = default_scenario();
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError("unknown key '" + key + "'", line);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);
    if (value.empty() && key != "shoals") throw ConfigError("missing value for '" + key + "'", line);
    try {
      it->second->set(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (key '" + key + "')", line);
    }
  }
  try {
    config.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return config;
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ScenarioConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

}  // namespace tidenav
