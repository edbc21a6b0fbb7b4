#include "asv/env.hpp"

#include <cmath>
#include <sstream>

#include "asv/errors.hpp"
#include "asv/io.hpp"

namespace asv {

void RewardParams::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("reward: lambda must lie in (0, 1]");
  if (!(gamma_e > 0.0 && gamma_theta > 0.0 && gamma_x > 0.0 && epsilon_x > 0.0 &&
        alpha_r > 0.0 && alpha_lambda > 0.0 && beta_lambda > 0.0))
    throw ConfigError("reward: coefficients must be strictly positive");
  if (!(r_collision < 0.0)) throw ConfigError("reward: r_collision must be negative");
}

double sample_lambda(Rng& rng, const RewardParams& params) {
  const double g = rng.gamma(params.alpha_lambda, params.beta_lambda);
  return std::pow(10.0, -g);
}

double reward_pf(double u, double v, double course_error, double cross_track,
                 double max_speed, const RewardParams& params) {
  const double progress = std::hypot(u, v) / max_speed * std::cos(course_error);
  return -1.0 + (progress + 1.0) * (std::exp(-params.gamma_e * std::fabs(cross_track)) + 1.0);
}

double reward_oa(std::span<const double> distances, std::span<const double> angles,
                 const RewardParams& params) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double weight = 1.0 / (1.0 + std::fabs(params.gamma_theta * angles[i]));
    const double x = std::max(distances[i], params.epsilon_x);
    num += weight / (params.gamma_x * x * x);
    den += weight;
  }
  return den > 0.0 ? -num / den : 0.0;
}

double reward_exists(const RewardParams& params) {
  return -params.lambda * (2.0 * params.alpha_r + 1.0);
}

double total_reward(double r_pf, double r_oa, bool collided, const RewardParams& params) {
  if (collided) return (1.0 - params.lambda) * params.r_collision;
  return params.lambda * r_pf + (1.0 - params.lambda) * r_oa + reward_exists(params);
}

bool detect_collision(const Vec2& position, std::span<const Obstacle> obstacles,
                      double width) {
  for (const Obstacle& o : obstacles)
    if ((position - o.center).norm() <= o.radius + 0.5 * width) return true;
  return false;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::Goal: return "goal";
    case Termination::Collision: return "collision";
    case Termination::RewardFloor: return "reward_floor";
    case Termination::StepCap: return "step_cap";
  }
  return "?";
}

void EnvConfig::validate() const {
  sensor.validate();
  gen.validate();
  if (sensor.sectors != kNumSectorFeatures)
    throw ConfigError("env: observation layout requires exactly 25 sectors");
  if (!(step_size > 0.0)) throw ConfigError("env: step_size must be > 0");
  if (!(lookahead > 0.0)) throw ConfigError("env: lookahead must be > 0");
  if (!(gamma_omega > 0.0)) throw ConfigError("env: gamma_omega must be > 0");
  if (!(goal_radius > 0.0)) throw ConfigError("env: goal_radius must be > 0");
  if (!(reward_floor < 0.0)) throw ConfigError("env: reward_floor must be negative");
  if (max_steps < 1) throw ConfigError("env: max_steps must be >= 1");
  if (fixed_lambda && !(*fixed_lambda > 0.0 && *fixed_lambda <= 1.0))
    throw ConfigError("env: fixed lambda must lie in (0, 1]");
  RewardParams r = reward;
  r.lambda = 1.0;
  r.validate();
}

PathFollowingEnv::PathFollowingEnv(EnvConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  config_.validate();
}

Observation PathFollowingEnv::reset() {
  const std::uint64_t scenario_seed = rng_.next_u64();
  Scenario sc = generate_scenario(config_.gen, scenario_seed);
  const double lambda = config_.fixed_lambda ? *config_.fixed_lambda
                                             : sample_lambda(rng_, config_.reward);
  return begin_episode(std::move(sc), lambda);
}

Observation PathFollowingEnv::reset(const Scenario& scenario, std::optional<double> lambda) {
  double lam;
  if (lambda) {
    lam = *lambda;
  } else if (config_.fixed_lambda) {
    lam = *config_.fixed_lambda;
  } else {
    lam = sample_lambda(rng_, config_.reward);
  }
  return begin_episode(scenario, lam);
}

Observation PathFollowingEnv::begin_episode(Scenario scenario, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("env: lambda must lie in (0, 1]");
  scenario_ = std::move(scenario);
  path_.emplace(scenario_.path());
  reward_ = config_.reward;
  reward_.lambda = lambda;

  const Vec2 start = path_->point(0.0);
  state_ = VesselState{start.x(), start.y(), wrap_angle(path_->tangent_angle(0.0)),
                       0.0, 0.0, 0.0};
  path_var_ = {0.0};
  cumulative_ = 0.0;
  steps_ = 0;
  active_ = true;
  done_ = false;
  trace_.clear();

  const TrackingErrors err =
      tracking_errors(*path_, path_var_.omega_bar, start,
                      course_angle(state_.psi, state_.u, state_.v), config_.lookahead);
  return observe(err, cast_rays(state_, scenario_.obstacles, config_.sensor));
}

Observation PathFollowingEnv::observe(const TrackingErrors& err,
                                      const SensorSweep& sweep) const {
  Observation obs{};
  obs[0] = state_.u;
  obs[1] = state_.v;
  obs[2] = state_.r;
  obs[3] = err.lookahead_course_error;
  obs[4] = err.course_error;
  obs[5] = err.cross_track;
  obs[6] = std::log10(reward_.lambda);
  const std::vector<double> pooled =
      pool_all(sweep.distances, PoolingMethod::Feasibility, config_.sensor);
  for (int k = 0; k < kNumSectorFeatures; ++k)
    obs[kNumScalarFeatures + k] =
        std::clamp(1.0 - pooled[k] / config_.sensor.range, 0.0, 1.0);
  return obs;
}

StepResult PathFollowingEnv::step(const Action& action) {
  if (!active_) throw ProtocolError("env: step() called without an active episode");
  if (done_) throw ProtocolError("env: step() called after the episode finished");

  const ControlInput applied = config_.vessel.saturate({action[0], action[1]});
  state_ = step_rkf45(state_, applied, config_.vessel, config_.step_size);
  ++steps_;

  const Vec2 pos(state_.x, state_.y);
  const double course = course_angle(state_.psi, state_.u, state_.v);
  const TrackingErrors before =
      tracking_errors(*path_, path_var_.omega_bar, pos, course, config_.lookahead);
  path_var_ = advance_path_variable(path_var_, path_->length(), state_.u, state_.v,
                                    before.course_error, before.along_track,
                                    config_.step_size, config_.gamma_omega);
  const TrackingErrors err =
      tracking_errors(*path_, path_var_.omega_bar, pos, course, config_.lookahead);

  StepResult out;
  out.info.sweep = cast_rays(state_, scenario_.obstacles, config_.sensor);
  const bool collided = detect_collision(pos, scenario_.obstacles, config_.vessel.width) ||
                        out.info.sweep.inside_obstacle;
  const double r_pf = reward_pf(state_.u, state_.v, err.course_error, err.cross_track,
                                config_.vessel.max_speed, reward_);
  const double r_oa = reward_oa(out.info.sweep.distances, out.info.sweep.angles, reward_);
  out.reward = total_reward(r_pf, r_oa, collided, reward_);
  cumulative_ += out.reward;

  if (collided) {
    out.reason = Termination::Collision;
  } else if ((pos - scenario_.end).norm() <= config_.goal_radius) {
    out.reason = Termination::Goal;
  } else if (cumulative_ <= config_.reward_floor) {
    out.reason = Termination::RewardFloor;
  } else if (steps_ >= config_.max_steps) {
    out.reason = Termination::StepCap;
  }
  out.done = out.reason != Termination::None;
  done_ = out.done;

  out.observation = observe(err, out.info.sweep);
  out.info.cross_track = err.cross_track;
  out.info.along_track = err.along_track;
  out.info.position = pos;

  if (trace_enabled_) {
    trace_.push_back({steps_ * config_.step_size, state_.x, state_.y, state_.psi, state_.u,
                      state_.v, state_.r, applied.thrust, applied.yaw_moment, out.reward,
                      err.cross_track, err.along_track, out.reason});
  }
  return out;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream os;
  os << "t,x,y,psi,u,v,r,T_u,T_r,reward,e,s,done_reason\n";
  for (const TraceRow& r : rows) {
    os << format_double(r.t) << ',' << format_double(r.x) << ',' << format_double(r.y) << ','
       << format_double(r.psi) << ',' << format_double(r.u) << ',' << format_double(r.v) << ','
       << format_double(r.r) << ',' << format_double(r.thrust) << ','
       << format_double(r.yaw_moment) << ',' << format_double(r.reward) << ','
       << format_double(r.cross_track) << ',' << format_double(r.along_track) << ','
       << to_string(r.reason) << '\n';
  }
  return os.str();
}

}  // namespace asv
