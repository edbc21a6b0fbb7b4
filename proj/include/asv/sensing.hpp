#pragma once

// Rangefinder suite simulation and sector pooling.
//
// N rays fan out symmetrically about the bow over a total span S_s, indexed
// counter-clockwise (increasing vessel-relative angle). The suite is split
// into d sectors of n = N / d neighbouring rays, and each sector is reduced to
// a single distance by min, max or feasibility pooling.

#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "asv/dynamics.hpp"
#include "asv/rng.hpp"
#include "asv/scenario.hpp"

namespace asv {

struct SensorConfig {
  int n_rays = 225;
  double span = 4.0 * std::numbers::pi / 3.0;  // rad
  double range = 150.0;                        // m
  int sectors = 25;
  double width = 4.0;  // m, vessel width used by feasibility pooling

  void validate() const;
  int rays_per_sector() const { return n_rays / sectors; }
  // Angle between neighbouring rays.
  double ray_spacing() const { return n_rays > 1 ? span / (n_rays - 1) : 0.0; }
  double ray_angle(int i) const { return -0.5 * span + i * ray_spacing(); }
  bool operator==(const SensorConfig&) const = default;
};

struct SensorSweep {
  std::vector<double> distances;  // m, clipped to [0, range]
  std::vector<double> angles;     // rad, vessel-relative
  bool inside_obstacle = false;
};

enum class PoolingMethod { Min, Max, Feasibility };

std::string to_string(PoolingMethod m);
PoolingMethod parse_pooling_method(const std::string& s);

SensorSweep cast_rays(const VesselState& pose, std::span<const Obstacle> obstacles,
                      const SensorConfig& cfg);

double min_pool(std::span<const double> sector);
double max_pool(std::span<const double> sector);

// Largest distance the vessel can advance into the sector. Readings are
// visited in ascending order; at each level the openings are the maximal runs
// of readings strictly beyond it, a run of L rays being (L + 1) * theta * level
// wide (the rays themselves plus a half arc at each boundary). The first level
// with no opening wider than `width` is returned.
double feasibility_pool(std::span<const double> sector, double ray_spacing,
                        double width, double range);
double feasibility_pool(std::span<const double> sector, const SensorConfig& cfg);

double pool(std::span<const double> sector, PoolingMethod method,
            const SensorConfig& cfg);
std::vector<double> pool_all(std::span<const double> distances,
                             PoolingMethod method, const SensorConfig& cfg);

// RMS deviation of the pooled sectors under additive Gaussian sensor noise
// (noisy readings clipped to [0, range]).
double robustness_metric(std::span<const double> clean, double sigma, int trials,
                         PoolingMethod method, const SensorConfig& cfg, Rng& rng);

// A fixed cluttered scene (vessel at the origin heading north) used by the
// robustness and pooling comparisons.
std::vector<Obstacle> reference_pooling_scene();

struct PoolingBenchResult {
  PoolingMethod method;
  int n;
  double mean_ns;
  double std_ns;
};

PoolingBenchResult pooling_bench(int n, PoolingMethod method, int samples,
                                 const SensorConfig& cfg, std::uint64_t seed);
std::string pooling_bench_csv(std::span<const PoolingBenchResult> results);

}  // namespace asv
