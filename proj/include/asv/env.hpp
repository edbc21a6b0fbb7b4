#pragma once

// Path-following / collision-avoidance MDP: observation vector, reward terms,
// termination and the reset/step episode protocol.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asv/dynamics.hpp"
#include "asv/geometry.hpp"
#include "asv/rng.hpp"
#include "asv/scenario.hpp"
#include "asv/sensing.hpp"

namespace asv {

inline constexpr int kNumScalarFeatures = 7;
inline constexpr int kNumSectorFeatures = 25;
inline constexpr int kObservationSize = kNumScalarFeatures + kNumSectorFeatures;
inline constexpr int kActionSize = 2;

// Order: u, v, r, look-ahead course error, course error, cross-track error,
// log10(lambda), then one closeness value 1 - feasibility/S_r per sector.
using Observation = std::array<double, kObservationSize>;
using Action = std::array<double, kActionSize>;

struct RewardParams {
  double lambda = 1.0;
  double gamma_e = 0.05;      // 1/m
  double gamma_theta = 4.0;
  double gamma_x = 0.005;
  double epsilon_x = 1.0;     // m
  double alpha_r = 0.1;
  double r_collision = -2000.0;
  double alpha_lambda = 1.0;  // Gamma shape for -log10(lambda)
  double beta_lambda = 2.0;   // Gamma rate

  void validate() const;
};

// lambda = 10^-g with g ~ Gamma(alpha_lambda, beta_lambda).
double sample_lambda(Rng& rng, const RewardParams& params);

double reward_pf(double u, double v, double course_error, double cross_track,
                 double max_speed, const RewardParams& params);
double reward_oa(std::span<const double> distances, std::span<const double> angles,
                 const RewardParams& params);
double reward_exists(const RewardParams& params);
double total_reward(double r_pf, double r_oa, bool collided, const RewardParams& params);

bool detect_collision(const Vec2& position, std::span<const Obstacle> obstacles,
                      double width);

enum class Termination { None, Goal, Collision, RewardFloor, StepCap };
std::string to_string(Termination t);

struct StepInfo {
  double cross_track = 0.0;
  double along_track = 0.0;
  Vec2 position = Vec2::Zero();
  SensorSweep sweep;
};

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  bool done = false;
  Termination reason = Termination::None;
  StepInfo info;
};

// Abstract episodic environment consumed by the trainer.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual Observation reset() = 0;
  virtual StepResult step(const Action& action) = 0;
};

struct EnvConfig {
  VesselParams vessel = default_vessel_params();
  SensorConfig sensor;
  GenParams gen;
  RewardParams reward;
  double step_size = 0.14;        // s
  double lookahead = 100.0;       // m
  double gamma_omega = 0.05;      // 1/s
  double goal_radius = 5.0;       // m
  double reward_floor = -5000.0;  // cumulative
  int max_steps = 10000;
  // When set, every reset uses this lambda instead of sampling.
  std::optional<double> fixed_lambda;

  void validate() const;
};

struct TraceRow {
  double t, x, y, psi, u, v, r, thrust, yaw_moment, reward, cross_track, along_track;
  Termination reason;
};

class PathFollowingEnv final : public Environment {
 public:
  PathFollowingEnv(EnvConfig config, std::uint64_t seed);

  // Fresh scenario from the generator parameters.
  Observation reset() override;
  // Fixed scenario; lambda pinned if given, otherwise per the config.
  Observation reset(const Scenario& scenario, std::optional<double> lambda = std::nullopt);
  StepResult step(const Action& action) override;

  const EnvConfig& config() const { return config_; }
  const VesselState& state() const { return state_; }
  const Scenario& scenario() const { return scenario_; }
  const Path& path() const { return *path_; }
  double lambda() const { return reward_.lambda; }
  double path_variable() const { return path_var_.omega_bar; }
  double cumulative_reward() const { return cumulative_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }

  void set_trace(bool enabled) { trace_enabled_ = enabled; }
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  Observation begin_episode(Scenario scenario, double lambda);
  Observation observe(const TrackingErrors& errors, const SensorSweep& sweep) const;

  EnvConfig config_;
  Rng rng_;
  Scenario scenario_;
  std::optional<Path> path_;
  RewardParams reward_;
  VesselState state_;
  PathVariable path_var_;
  double cumulative_ = 0.0;
  int steps_ = 0;
  bool active_ = false;
  bool done_ = false;
  bool trace_enabled_ = false;
  std::vector<TraceRow> trace_;
};

std::string trace_csv(const std::vector<TraceRow>& rows);

}  // namespace asv
