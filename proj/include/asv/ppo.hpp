#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "asv/policy.hpp"

namespace asv {

struct PPOConfig {
  double gamma = 0.999;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double c1 = 0.5;   // value loss weight
  double c2 = 0.01;  // entropy bonus weight
  double learning_rate = 2e-4;
  int rollout_steps = 1024;  // T, per worker
  int workers = 8;           // N_A
  int minibatch_size = 32;   // N_MB
  int epochs = 10;           // N_E
  std::int64_t total_steps = 1'000'000;  // K, aggregated over workers
  bool normalize_advantages = true;

  void validate() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// `values` has one more entry than `rewards`: the bootstrap value of the state
// reached after the last step. dones[t] marks that step t ended an episode,
// in which case nothing is bootstrapped across it.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double gamma, double gae_lambda);

struct Minibatch {
  std::vector<Observation> observations;
  std::vector<Eigen::Vector2d> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return observations.size(); }
};

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;  // -mean(min(r A, clip(r) A))
  double value = 0.0;   // mean((V - R)^2)
  double entropy = 0.0;
  double approx_kl = 0.0;  // mean(old_logp - new_logp)
  double clip_fraction = 0.0;
};

// Clipped-surrogate loss; fills `grad` (resized to the parameter count) with
// its exact gradient when non-null.
LossBreakdown ppo_loss(const PolicyValueNet& net, const Minibatch& batch,
                       const PPOConfig& cfg, Eigen::VectorXd* grad);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t t = 0;

  static AdamState zeros(std::size_t n) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)),
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), 0};
  }
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               double learning_rate);

}  // namespace asv
