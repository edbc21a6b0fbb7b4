#pragma once

// Parallel-rollout PPO training loop. Each iteration, every worker rolls its
// own environment for T steps against a read-only snapshot of the network;
// advantages are computed per worker, the N_A * T samples are pooled in worker
// order, and N_E epochs of shuffled minibatch Adam updates follow on a single
// thread. Given the same seed the loop is bit-reproducible.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asv/checkpoint.hpp"
#include "asv/env.hpp"
#include "asv/ppo.hpp"

namespace asv {

using EnvFactory = std::function<std::unique_ptr<Environment>(int worker, std::uint64_t seed)>;

struct IterationMetrics {
  std::uint64_t iteration = 0;
  std::uint64_t steps = 0;
  int episodes = 0;
  double mean_reward = 0.0;  // NaN when no episode finished this iteration
  double success_rate = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl_estimate = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const IterationMetrics& m);

struct TrainOptions {
  PPOConfig ppo;
  std::uint64_t seed = 1;
  FeatureScaling scaling = default_feature_scaling(2.0, 100.0);
  // Writes checkpoints and metrics.csv here when non-empty.
  std::filesystem::path out_dir;
  int checkpoint_every = 10;  // iterations; 0 writes only the final one
  std::optional<Checkpoint> resume;
  // Bias of the policy output layer for a fresh network; the untrained policy
  // then acts around this point instead of zero force.
  Eigen::Vector2d initial_action_mean = Eigen::Vector2d::Zero();
  bool parallel = true;
  std::function<void(const IterationMetrics&)> on_iteration;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<IterationMetrics> metrics;
};

TrainResult train(const EnvFactory& factory, const TrainOptions& options);

}  // namespace asv
