#pragma once

// Synthetic tidal waterway: bathymetry plus a sinusoidal tide, the tide islands it
// produces for a given draft, and the per-time-step radius observations used to
// build empirical distributions.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tidenav {

struct Extent {
  double lo_km = 0.0;
  double hi_km = 100.0;
  double length() const { return hi_km - lo_km; }
  bool contains(double p) const { return p >= lo_km && p <= hi_km; }
  bool operator==(const Extent&) const = default;
};

/// Piecewise-linear function of position, constant beyond the first and last knots.
class PiecewiseLinear {
 public:
  PiecewiseLinear() : PiecewiseLinear(0.0) {}
  explicit PiecewiseLinear(double constant);
  explicit PiecewiseLinear(std::vector<std::pair<double, double>> knots);

  double operator()(double x) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }
  double min_value() const;

  bool operator==(const PiecewiseLinear&) const = default;

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// A shoal lowers the bed by `rise_m * exp(-(|p - c| / half_width)^shape)`.
/// shape = 2 is a Gaussian bump; larger shapes give flat-topped bars with steep flanks.
struct Shoal {
  double center_km = 0.0;
  double rise_m = 0.0;
  double half_width_km = 1.0;
  double shape = 2.0;

  bool operator==(const Shoal&) const = default;
};

struct DepthFieldConfig {
  Extent extent{};
  double grid_km = 0.05;
  double period_h = 12.42;
  double noise_sd_m = 0.0;
  // Additive Gaussian error on each measured radius (km), truncated at zero.
  double radius_noise_sd_km = 0.0;
  std::uint64_t seed = 1;
  PiecewiseLinear bathymetry{10.0};
  std::vector<Shoal> shoals{};
  PiecewiseLinear amplitude{1.0};
  PiecewiseLinear phase{0.0};

  bool operator==(const DepthFieldConfig&) const = default;
  void validate() const;
};

/// Depth (m) over position (km) and time (h).
///
/// depth(p, t) = bed(p) + amplitude(p) * sin(2 pi t / T + phase(p)) + e(t)
///
/// where bed(p) is the bathymetry minus all shoals and e(t) is a water-level error
/// drawn from N(0, noise_sd^2). The error depends only on (seed, t rounded to the
/// second), so the field is a pure function and repeated evaluations agree.
class DepthField {
 public:
  explicit DepthField(DepthFieldConfig config);

  double depth_at(double p_km, double t_h) const;
  double bed_depth(double p_km) const;
  double tide(double p_km, double t_h) const;
  double water_level_noise(double t_h) const;

  /// Uniform grid over the extent, `grid_km` apart, both ends included.
  std::vector<double> grid() const;
  const DepthFieldConfig& config() const { return config_; }
  const Extent& extent() const { return config_.extent; }
  double period() const { return config_.period_h; }

  DepthField without_noise() const;

 private:
  DepthFieldConfig config_;
};

/// Closed interval of grid positions.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double p) const { return p >= lo && p <= hi; }
};

/// Connected components of {p : depth(p, t) < draft} on the field's grid, sorted by position.
std::vector<Interval> extract_island_region(const DepthField& field, double draft_m, double t_h);

struct EnclosingInterval {
  double center = 0.0;
  double radius = 0.0;
};

/// Smallest 1-D ball containing every point.
EnclosingInterval enclosing_interval(std::span<const double> points);

/// Times origin_h + k * step_h for k = 0 .. steps-1.
struct TimeGrid {
  double origin_h = 0.0;
  double step_h = 0.1;
  std::size_t steps = 0;
  double at(std::size_t k) const { return origin_h + static_cast<double>(k) * step_h; }
};

/// A tide island: the union of its violating sets over one noise-free period
/// (`footprint`), its fixed center, and the stretch of waterway whose violating
/// points are attributed to it (`catchment`, split halfway to its neighbours).
struct Island {
  int id = 0;  // 1-based, ordered by position
  double center_km = 0.0;
  Interval footprint{};
  Interval catchment{};
};

std::vector<Island> find_islands(const DepthField& field, double draft_m,
                                 std::size_t samples_per_period = 480);

/// Evaluates island radii quickly: caches bed, amplitude and phase on the catchment grid.
class RadiusProbe {
 public:
  RadiusProbe(const DepthField& field, const Island& island, double draft_m);

  /// Max distance from the island center to any violating grid point at t (0 if none).
  double radius_at(double t_h) const;
  /// radius_at on the noise-free field.
  double noiseless_radius_at(double t_h) const;
  /// One measurement at t: radius on the noisy field, plus truncated radius noise.
  double observe(double t_h) const;

 private:
  double radius_with_level(double t_h, double level_m) const;

  const DepthField* field_;
  Island island_;
  double draft_m_;
  double omega_;
  std::vector<double> pos_, dist_, bed_, amp_cos_, amp_sin_;
};

struct ObstacleTimeline {
  int id = 0;
  double center_km = 0.0;
  TimeGrid grid{};
  std::vector<double> realized_radius;                // per step
  std::vector<std::vector<double>> observation_sets;  // per step, N values each

  std::size_t steps() const { return realized_radius.size(); }
  std::size_t sample_count() const {
    return observation_sets.empty() ? 0 : observation_sets.front().size();
  }
};

/// Timeline of island `island_index` (1-based). The realized radius is the noise-free
/// radius; observation i at step t is the radius measured at t - i*T, i = 1..N.
ObstacleTimeline build_obstacle_timeline(const DepthField& field, double draft_m, int island_index,
                                         const TimeGrid& grid, std::size_t n_samples);

/// Historical radius measurements for one island: values[step][i] measured at
/// t - (first_period + i) * T.
struct ObservationPool {
  int island_id = 0;
  double center_km = 0.0;
  TimeGrid grid{};
  std::size_t first_period = 1;
  std::vector<std::vector<double>> values;

  std::size_t size() const { return values.empty() ? 0 : values.front().size(); }
  std::size_t steps() const { return values.size(); }
};

ObservationPool build_observation_pool(const DepthField& field, double draft_m, int island_index,
                                       const TimeGrid& grid, std::size_t first_period,
                                       std::size_t pool_size);
ObservationPool build_observation_pool(const DepthField& field, double draft_m,
                                       const Island& island, const TimeGrid& grid,
                                       std::size_t first_period, std::size_t pool_size);

/// Uniform discrete distribution over N radius samples (km).
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples);

  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double weight() const { return 1.0 / static_cast<double>(samples_.size()); }
  double mean() const;
  double max() const;

 private:
  std::vector<double> samples_;
};

EmpiricalDistribution empirical_distribution(std::span<const double> observations);

/// Deterministic standard normal variate keyed by (seed, stream, key).
double hashed_normal(std::uint64_t seed, std::uint64_t stream, std::int64_t key);

}  // namespace tidenav
