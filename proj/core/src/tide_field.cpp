#include "tidenav/tide_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "tidenav/error.hpp"

namespace tidenav {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_unit_open(std::uint64_t bits) {
  // 53 random mantissa bits mapped into (0, 1].
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

std::int64_t time_key(double t_h) { return std::llround(t_h * 3600.0); }

constexpr std::uint64_t kLevelStream = 0x11;
constexpr std::uint64_t kRadiusStream = 0x5200;

}  // namespace

double hashed_normal(std::uint64_t seed, std::uint64_t stream, std::int64_t key) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(stream));
  h = splitmix64(h ^ static_cast<std::uint64_t>(key));
  const double u1 = to_unit_open(h);
  const double u2 = to_unit_open(splitmix64(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// PiecewiseLinear

PiecewiseLinear::PiecewiseLinear(double constant) : knots_{{0.0, constant}} {}

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) throw DomainError("piecewise-linear function needs at least one knot");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].first > knots_[i - 1].first)) {
      throw DomainError("piecewise-linear knots must have strictly increasing positions");
    }
  }
  for (const auto& [x, y] : knots_) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw DomainError("non-finite knot");
  }
}

double PiecewiseLinear::operator()(double x) const {
  if (knots_.size() == 1 || x <= knots_.front().first) return knots_.front().second;
  if (x >= knots_.back().first) return knots_.back().second;
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), x,
                             [](double v, const auto& k) { return v < k.first; });
  auto lo = hi - 1;
  const double w = (x - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

double PiecewiseLinear::min_value() const {
  double m = knots_.front().second;
  for (const auto& k : knots_) m = std::min(m, k.second);
  return m;
}

// ---------------------------------------------------------------------------
// DepthField

void DepthFieldConfig::validate() const {
  if (!(extent.hi_km > extent.lo_km)) throw DomainError("waterway extent is empty");
  if (!(grid_km > 0.0)) throw DomainError("grid_km must be positive");
  if (!(period_h > 0.0)) throw DomainError("tide period must be positive");
  if (!(noise_sd_m >= 0.0)) throw DomainError("noise_sd_m must be non-negative");
  if (!(radius_noise_sd_km >= 0.0)) throw DomainError("radius_noise_sd_km must be non-negative");
  if (amplitude.min_value() < 0.0) throw DomainError("tide amplitude must be non-negative");
  for (const auto& s : shoals) {
    if (!(s.half_width_km > 0.0) || !(s.shape > 0.0)) {
      throw DomainError("shoal half-width and shape must be positive");
    }
  }
}

DepthField::DepthField(DepthFieldConfig config) : config_(std::move(config)) { config_.validate(); }

double DepthField::bed_depth(double p_km) const {
  double d = config_.bathymetry(p_km);
  for (const auto& s : config_.shoals) {
    const double u = std::abs(p_km - s.center_km) / s.half_width_km;
    d -= s.rise_m * std::exp(-std::pow(u, s.shape));
  }
  return d;
}

double DepthField::tide(double p_km, double t_h) const {
  return config_.amplitude(p_km) *
         std::sin(2.0 * std::numbers::pi * t_h / config_.period_h + config_.phase(p_km));
}

double DepthField::water_level_noise(double t_h) const {
  if (config_.noise_sd_m == 0.0) return 0.0;
  return config_.noise_sd_m * hashed_normal(config_.seed, kLevelStream, time_key(t_h));
}

double DepthField::depth_at(double p_km, double t_h) const {
  if (!config_.extent.contains(p_km)) {
    throw DomainError("position " + std::to_string(p_km) + " km outside the waterway extent");
  }
  if (!(t_h >= 0.0)) throw DomainError("time must be non-negative");
  return bed_depth(p_km) + tide(p_km, t_h) + water_level_noise(t_h);
}

std::vector<double> DepthField::grid() const {
  const auto& e = config_.extent;
  const double h = config_.grid_km;
  const auto n = static_cast<std::size_t>(std::floor(e.length() / h + 1e-9));
  std::vector<double> g;
  g.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) g.push_back(e.lo_km + static_cast<double>(i) * h);
  if (e.hi_km - g.back() > 1e-9 * h) g.push_back(e.hi_km);
  g.back() = std::min(g.back(), e.hi_km);
  return g;
}

DepthField DepthField::without_noise() const {
  DepthFieldConfig c = config_;
  c.noise_sd_m = 0.0;
  c.radius_noise_sd_km = 0.0;
  return DepthField(std::move(c));
}

// ---------------------------------------------------------------------------
// Islands

namespace {

std::vector<Interval> components(const std::vector<double>& grid, const std::vector<char>& mask) {
  std::vector<Interval> out;
  std::size_t i = 0;
  while (i < grid.size()) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < grid.size() && mask[j + 1]) ++j;
    out.push_back({grid[i], grid[j]});
    i = j + 1;
  }
  return out;
}

}  // namespace

std::vector<Interval> extract_island_region(const DepthField& field, double draft_m, double t_h) {
  if (!(draft_m > 0.0)) throw DomainError("draft must be positive");
  if (!(field.extent().length() > 0.0)) throw DomainError("waterway extent is empty");
  const auto grid = field.grid();
  std::vector<char> mask(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) mask[i] = field.depth_at(grid[i], t_h) < draft_m;
  return components(grid, mask);
}

EnclosingInterval enclosing_interval(std::span<const double> points) {
  if (points.empty()) throw DomainError("enclosing interval of an empty set");
  const auto [mn, mx] = std::minmax_element(points.begin(), points.end());
  return {0.5 * (*mn + *mx), 0.5 * (*mx - *mn)};
}

std::vector<Island> find_islands(const DepthField& field, double draft_m,
                                 std::size_t samples_per_period) {
  if (!(draft_m > 0.0)) throw DomainError("draft must be positive");
  if (samples_per_period == 0) throw DomainError("samples_per_period must be positive");
  const auto calm = field.without_noise();
  const auto grid = calm.grid();
  const double omega = 2.0 * std::numbers::pi / calm.period();

  std::vector<double> bed(grid.size()), ac(grid.size()), as(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bed[i] = calm.bed_depth(grid[i]);
    const double a = calm.config().amplitude(grid[i]);
    const double ph = calm.config().phase(grid[i]);
    ac[i] = a * std::cos(ph);
    as[i] = a * std::sin(ph);
  }

  std::vector<char> mask(grid.size(), 0);
  for (std::size_t j = 0; j < samples_per_period; ++j) {
    const double t = calm.period() * static_cast<double>(j) / static_cast<double>(samples_per_period);
    const double s = std::sin(omega * t), c = std::cos(omega * t);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!mask[i] && bed[i] + ac[i] * s + as[i] * c < draft_m) mask[i] = 1;
    }
  }

  const auto parts = components(grid, mask);
  std::vector<Island> islands;
  islands.reserve(parts.size());
  for (std::size_t l = 0; l < parts.size(); ++l) {
    Island isl;
    isl.id = static_cast<int>(l) + 1;
    isl.footprint = parts[l];
    isl.center_km = 0.5 * (parts[l].lo + parts[l].hi);
    isl.catchment.lo = l == 0 ? field.extent().lo_km : 0.5 * (parts[l - 1].hi + parts[l].lo);
    isl.catchment.hi =
        l + 1 == parts.size() ? field.extent().hi_km : 0.5 * (parts[l].hi + parts[l + 1].lo);
    islands.push_back(isl);
  }
  return islands;
}

// ---------------------------------------------------------------------------
// RadiusProbe

RadiusProbe::RadiusProbe(const DepthField& field, const Island& island, double draft_m)
    : field_(&field),
      island_(island),
      draft_m_(draft_m),
      omega_(2.0 * std::numbers::pi / field.period()) {
  if (!(draft_m > 0.0)) throw DomainError("draft must be positive");
  for (double p : field.grid()) {
    if (!island.catchment.contains(p)) continue;
    const double a = field.config().amplitude(p);
    const double ph = field.config().phase(p);
    pos_.push_back(p);
    dist_.push_back(std::abs(p - island.center_km));
    bed_.push_back(field.bed_depth(p));
    amp_cos_.push_back(a * std::cos(ph));
    amp_sin_.push_back(a * std::sin(ph));
  }
}

double RadiusProbe::radius_with_level(double t_h, double level_m) const {
  if (!(t_h >= 0.0)) throw DomainError("time must be non-negative");
  const double s = std::sin(omega_ * t_h), c = std::cos(omega_ * t_h);
  double r = 0.0;
  for (std::size_t i = 0; i < pos_.size(); ++i) {
    if (dist_[i] > r && bed_[i] + amp_cos_[i] * s + amp_sin_[i] * c + level_m < draft_m_) {
      r = dist_[i];
    }
  }
  return r;
}

double RadiusProbe::radius_at(double t_h) const {
  return radius_with_level(t_h, field_->water_level_noise(t_h));
}

double RadiusProbe::noiseless_radius_at(double t_h) const { return radius_with_level(t_h, 0.0); }

double RadiusProbe::observe(double t_h) const {
  double r = radius_at(t_h);
  const double sd = field_->config().radius_noise_sd_km;
  if (sd > 0.0) {
    const auto stream = kRadiusStream + static_cast<std::uint64_t>(island_.id);
    r = std::max(0.0, r + sd * hashed_normal(field_->config().seed, stream, time_key(t_h)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Timelines and pools

namespace {

const Island& island_by_index(const std::vector<Island>& islands, int index) {
  if (index < 1 || static_cast<std::size_t>(index) > islands.size()) {
    throw DomainError("island index " + std::to_string(index) + " out of range 1.." +
                      std::to_string(islands.size()));
  }
  return islands[static_cast<std::size_t>(index) - 1];
}

}  // namespace

ObstacleTimeline build_obstacle_timeline(const DepthField& field, double draft_m, int island_index,
                                         const TimeGrid& grid, std::size_t n_samples) {
  if (n_samples == 0) throw DomainError("observation sets need N >= 1");
  const auto islands = find_islands(field, draft_m);
  const Island& island = island_by_index(islands, island_index);
  const RadiusProbe probe(field, island, draft_m);
  const double period = field.period();

  ObstacleTimeline tl;
  tl.id = island.id;
  tl.center_km = island.center_km;
  tl.grid = grid;
  tl.realized_radius.resize(grid.steps);
  tl.observation_sets.assign(grid.steps, std::vector<double>(n_samples));
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double t = grid.at(k);
    tl.realized_radius[k] = probe.noiseless_radius_at(t);
    for (std::size_t i = 0; i < n_samples; ++i) {
      tl.observation_sets[k][i] = probe.observe(t - static_cast<double>(i + 1) * period);
    }
  }
  return tl;
}

ObservationPool build_observation_pool(const DepthField& field, double draft_m, int island_index,
                                       const TimeGrid& grid, std::size_t first_period,
                                       std::size_t pool_size) {
  const auto islands = find_islands(field, draft_m);
  return build_observation_pool(field, draft_m, island_by_index(islands, island_index), grid,
                                first_period, pool_size);
}

ObservationPool build_observation_pool(const DepthField& field, double draft_m,
                                       const Island& island, const TimeGrid& grid,
                                       std::size_t first_period, std::size_t pool_size) {
  if (pool_size == 0) throw DomainError("observation pool must be nonempty");
  const RadiusProbe probe(field, island, draft_m);

  ObservationPool pool;
  pool.island_id = island.id;
  pool.center_km = island.center_km;
  pool.grid = grid;
  pool.first_period = first_period;
  pool.values.assign(grid.steps, std::vector<double>(pool_size));
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double t = grid.at(k);
    for (std::size_t i = 0; i < pool_size; ++i) {
      pool.values[k][i] =
          probe.observe(t - static_cast<double>(first_period + i) * field.period());
    }
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Empirical distribution

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) throw DomainError("empirical distribution needs at least one sample");
}

double EmpiricalDistribution::mean() const {
  return std::accumulate(samples_.begin(), samples_.end(), 0.0) /
         static_cast<double>(samples_.size());
}

double EmpiricalDistribution::max() const {
  return *std::max_element(samples_.begin(), samples_.end());
}

EmpiricalDistribution empirical_distribution(std::span<const double> observations) {
  return EmpiricalDistribution(std::vector<double>(observations.begin(), observations.end()));
}

}  // namespace tidenav
