#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asv/geometry.hpp"
#include "asv/rng.hpp"

namespace asv {

struct Obstacle {
  Vec2 center = Vec2::Zero();  // m
  double radius = 1.0;         // m

  bool operator==(const Obstacle&) const = default;
};

struct GenParams {
  int n_obstacles = 20;
  int n_waypoints_min = 2;
  int n_waypoints_max = 5;
  double path_length = 400.0;  // m, start-to-goal distance
  double mean_radius = 30.0;   // m, Poisson mean
  double offset_std = 150.0;   // m, lateral obstacle offset
  double vessel_width = 4.0;   // m, used for endpoint clearance

  void validate() const;
  bool operator==(const GenParams&) const = default;
};

struct Scenario {
  std::vector<Vec2> waypoints;
  std::vector<Obstacle> obstacles;
  Vec2 start = Vec2::Zero();
  Vec2 end = Vec2::Zero();
  std::uint64_t seed = 0;
  GenParams gen_params;

  // Rebuilt from waypoints; not serialized.
  Path path() const { return Path::build(waypoints); }

  bool operator==(const Scenario& o) const;
};

// Where an obstacle was placed relative to the path at generation time.
struct ObstaclePlacement {
  double arc = 0.0;     // omega_bar_obst
  double offset = 0.0;  // d_obst
  double path_angle = 0.0;
};

struct GeneratedScenario {
  Scenario scenario;
  Path path;
  std::vector<ObstaclePlacement> placements;
};

GeneratedScenario generate_scenario_traced(const GenParams& params, std::uint64_t seed);
Scenario generate_scenario(const GenParams& params, std::uint64_t seed);

inline constexpr int kScenarioFormatVersion = 1;

std::string serialize_scenario(const Scenario& s);
// `source` names the file in error messages.
Scenario parse_scenario(const std::string& text, const std::string& source = "<memory>");
void save_scenario(const Scenario& s, const std::filesystem::path& file);
Scenario load_scenario(const std::filesystem::path& file);

}  // namespace asv
