#include "asv/sensing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "asv/errors.hpp"

namespace asv {

void SensorConfig::validate() const {
  if (n_rays < 1 || sectors < 1) throw ConfigError("sensor: counts must be >= 1");
  if (n_rays % sectors != 0)
    throw ConfigError("sensor: n_rays must be divisible by sectors");
  if (!(span >= 0.0 && span <= 2.0 * std::numbers::pi))
    throw ConfigError("sensor: span must lie in [0, 2 pi]");
  if (!(range > 0.0)) throw ConfigError("sensor: range must be > 0");
  if (!(width > 0.0)) throw ConfigError("sensor: width must be > 0");
}

std::string to_string(PoolingMethod m) {
  switch (m) {
    case PoolingMethod::Min: return "min";
    case PoolingMethod::Max: return "max";
    case PoolingMethod::Feasibility: return "feasibility";
  }
  return "?";
}

PoolingMethod parse_pooling_method(const std::string& s) {
  if (s == "min") return PoolingMethod::Min;
  if (s == "max") return PoolingMethod::Max;
  if (s == "feasibility") return PoolingMethod::Feasibility;
  throw std::invalid_argument("unknown pooling method '" + s + "'");
}

SensorSweep cast_rays(const VesselState& pose, std::span<const Obstacle> obstacles,
                      const SensorConfig& cfg) {
  SensorSweep sweep;
  sweep.distances.assign(cfg.n_rays, cfg.range);
  sweep.angles.resize(cfg.n_rays);
  for (int i = 0; i < cfg.n_rays; ++i) sweep.angles[i] = cfg.ray_angle(i);

  const Vec2 origin(pose.x, pose.y);
  std::vector<double> cos_h(cfg.n_rays), sin_h(cfg.n_rays);
  for (int i = 0; i < cfg.n_rays; ++i) {
    cos_h[i] = std::cos(pose.psi + sweep.angles[i]);
    sin_h[i] = std::sin(pose.psi + sweep.angles[i]);
  }
  for (const Obstacle& o : obstacles) {
    if ((origin - o.center).squaredNorm() <= o.radius * o.radius) {
      sweep.inside_obstacle = true;
      std::fill(sweep.distances.begin(), sweep.distances.end(), 0.0);
      return sweep;
    }
  }

  for (const Obstacle& o : obstacles) {
    const Vec2 f = origin - o.center;
    const double dist = f.norm();
    // Skip circles entirely out of range.
    if (dist - o.radius >= cfg.range) continue;
    const double c = f.squaredNorm() - o.radius * o.radius;
    for (int i = 0; i < cfg.n_rays; ++i) {
      const double b = f.x() * cos_h[i] + f.y() * sin_h[i];
      if (b >= 0.0) continue;  // circle behind the ray origin
      const double disc = b * b - c;
      if (disc < 0.0) continue;
      const double t = -b - std::sqrt(disc);
      if (t > 0.0 && t < sweep.distances[i]) sweep.distances[i] = t;
    }
  }
  return sweep;
}

double min_pool(std::span<const double> sector) {
  return *std::min_element(sector.begin(), sector.end());
}

double max_pool(std::span<const double> sector) {
  return *std::max_element(sector.begin(), sector.end());
}

double feasibility_pool(std::span<const double> sector, double ray_spacing,
                        double width, double range) {
  const std::size_t n = sector.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sector[a] < sector[b];
  });

  for (std::size_t idx = 0; idx < n; ++idx) {
    const double level = sector[order[idx]];
    if (idx > 0 && level == sector[order[idx - 1]]) continue;  // already feasible
    const double arc = ray_spacing * level;
    // Running width of the current run including its leading half arc; the
    // closing half arc is added at the comparison.
    double opening = 0.5 * arc;
    bool feasible = false;
    for (std::size_t j = 0; j < n && !feasible; ++j) {
      if (sector[j] > level) {
        opening += arc;
        feasible = opening + 0.5 * arc > width;
      } else {
        opening = 0.5 * arc;
      }
    }
    if (!feasible) return level;
  }
  return range;
}

double feasibility_pool(std::span<const double> sector, const SensorConfig& cfg) {
  return feasibility_pool(sector, cfg.ray_spacing(), cfg.width, cfg.range);
}

double pool(std::span<const double> sector, PoolingMethod method,
            const SensorConfig& cfg) {
  switch (method) {
    case PoolingMethod::Min: return min_pool(sector);
    case PoolingMethod::Max: return max_pool(sector);
    case PoolingMethod::Feasibility: return feasibility_pool(sector, cfg);
  }
  return cfg.range;
}

std::vector<double> pool_all(std::span<const double> distances,
                             PoolingMethod method, const SensorConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.rays_per_sector());
  if (distances.size() != n * static_cast<std::size_t>(cfg.sectors))
    throw std::invalid_argument("pool_all: sweep size does not match config");
  std::vector<double> out(static_cast<std::size_t>(cfg.sectors));
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = pool(distances.subspan(k * n, n), method, cfg);
  return out;
}

double robustness_metric(std::span<const double> clean, double sigma, int trials,
                         PoolingMethod method, const SensorConfig& cfg, Rng& rng) {
  const std::vector<double> reference = pool_all(clean, method, cfg);
  std::vector<double> noisy(clean.size());
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < clean.size(); ++i)
      noisy[i] = std::clamp(clean[i] + rng.gaussian(0.0, sigma), 0.0, cfg.range);
    const std::vector<double> pooled = pool_all(noisy, method, cfg);
    for (std::size_t k = 0; k < pooled.size(); ++k) {
      const double diff = pooled[k] - reference[k];
      sum_sq += diff * diff;
      ++count;
    }
  }
  return count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
}

std::vector<Obstacle> reference_pooling_scene() {
  // Vessel at the origin facing +x. A near obstacle on the port side, a
  // two-obstacle gate ahead and a scattering of far obstacles.
  return {
      {{25.0, -30.0}, 6.0},  {{70.0, -8.0}, 10.0},  {{70.0, 14.0}, 10.0},
      {{110.0, 45.0}, 15.0}, {{40.0, 60.0}, 12.0},  {{-20.0, 70.0}, 20.0},
      {{95.0, -75.0}, 18.0}, {{-30.0, -50.0}, 8.0}, {{130.0, -10.0}, 5.0},
  };
}

PoolingBenchResult pooling_bench(int n, PoolingMethod method, int samples,
                                 const SensorConfig& cfg, std::uint64_t seed) {
  if (n < 1 || samples < 2) throw std::invalid_argument("pooling_bench: n >= 1, samples >= 2");
  Rng rng(seed);
  constexpr int kSectorsPerSample = 64;
  std::vector<double> data(static_cast<std::size_t>(n) * kSectorsPerSample);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(samples));
  volatile double sink = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (double& x : data) x = rng.uniform(0.0, cfg.range);
    const auto t0 = std::chrono::steady_clock::now();
    double acc = 0.0;
    for (int k = 0; k < kSectorsPerSample; ++k)
      acc += pool(std::span<const double>(data).subspan(static_cast<std::size_t>(k) * n,
                                                        static_cast<std::size_t>(n)),
                  method, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    sink = sink + acc;
    times.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() /
                    kSectorsPerSample);
  }
  const double mean = std::accumulate(times.begin(), times.end(), 0.0) / times.size();
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  return {method, n, mean, std::sqrt(var / (times.size() - 1))};
}

std::string pooling_bench_csv(std::span<const PoolingBenchResult> results) {
  std::ostringstream os;
  os << "method,n,mean_ns,std_ns\n";
  for (const auto& r : results)
    os << to_string(r.method) << ',' << r.n << ',' << r.mean_ns << ',' << r.std_ns << '\n';
  return os.str();
}

}  // namespace asv
