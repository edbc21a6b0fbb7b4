#include "asv/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "asv/io.hpp"

namespace asv {

namespace {

struct Worker {
  std::unique_ptr<Environment> env;
  Observation obs{};
  double episode_reward = 0.0;

  // Rollout storage for one iteration.
  std::vector<Observation> observations;
  std::vector<Eigen::Vector2d> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;  // T + 1 entries, last one is the bootstrap
  std::vector<std::uint8_t> dones;
  std::vector<double> finished_rewards;
  int finished_successes = 0;
};

void rollout(Worker& w, const PolicyValueNet& net, int steps, Rng rng) {
  w.observations.clear();
  w.actions.clear();
  w.log_probs.clear();
  w.rewards.clear();
  w.values.clear();
  w.dones.clear();
  w.finished_rewards.clear();
  w.finished_successes = 0;
  const Eigen::Vector2d log_std = net.log_std();
  for (int t = 0; t < steps; ++t) {
    const Eigen::Vector2d mean = net.policy_mean(w.obs);
    const SampledAction a = sample_action(mean, log_std, rng);
    w.observations.push_back(w.obs);
    w.actions.push_back(a.action);
    w.log_probs.push_back(a.log_prob);
    w.values.push_back(net.value(w.obs));
    const StepResult res = w.env->step({a.action[0], a.action[1]});
    w.rewards.push_back(res.reward);
    w.dones.push_back(res.done ? 1 : 0);
    w.episode_reward += res.reward;
    if (res.done) {
      w.finished_rewards.push_back(w.episode_reward);
      if (res.reason == Termination::Goal) ++w.finished_successes;
      w.episode_reward = 0.0;
      w.obs = w.env->reset();
    } else {
      w.obs = res.observation;
    }
  }
  w.values.push_back(net.value(w.obs));
}

std::string dump_minibatch(const Minibatch& mb) {
  std::ostringstream os;
  os << "row,old_log_prob,advantage,return,action0,action1";
  for (int i = 0; i < kObservationSize; ++i) os << ",obs" << i;
  os << '\n';
  for (std::size_t j = 0; j < mb.size(); ++j) {
    os << j << ',' << format_double(mb.old_log_probs[j]) << ',' << format_double(mb.advantages[j])
       << ',' << format_double(mb.returns[j]) << ',' << format_double(mb.actions[j][0]) << ','
       << format_double(mb.actions[j][1]);
    for (double x : mb.observations[j]) os << ',' << format_double(x);
    os << '\n';
  }
  return os.str();
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint64_t iter) {
  char name[64];
  std::snprintf(name, sizeof name, "checkpoint_%06llu.bin",
                static_cast<unsigned long long>(iter));
  return dir / "checkpoints" / name;
}

}  // namespace

std::string metrics_csv_header() {
  return "iteration,steps,mean_reward,success_rate,policy_loss,value_loss,entropy,kl_estimate\n";
}

std::string metrics_csv_row(const IterationMetrics& m) {
  std::ostringstream os;
  os << m.iteration << ',' << m.steps << ',' << format_double(m.mean_reward) << ','
     << format_double(m.success_rate) << ',' << format_double(m.policy_loss) << ','
     << format_double(m.value_loss) << ',' << format_double(m.entropy) << ','
     << format_double(m.kl_estimate) << '\n';
  return os.str();
}

TrainResult train(const EnvFactory& factory, const TrainOptions& options) {
  const PPOConfig& cfg = options.ppo;
  cfg.validate();
  const Rng master(options.seed);

  TrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  if (options.resume) {
    ckpt = *options.resume;
  } else {
    ckpt.net = PolicyValueNet(options.scaling);
    Rng init = master.derive(0xB00);
    ckpt.net.initialize(init);
    ckpt.net.params().segment<2>(PolicyValueNet::kPolicy.b3) = options.initial_action_mean;
  }

  const bool write_files = !options.out_dir.empty();
  std::string metrics_text = metrics_csv_header();
  auto flush_outputs = [&](bool final) {
    if (!write_files) return;
    write_file_atomic(options.out_dir / "metrics.csv", metrics_text);
    if (final || (options.checkpoint_every > 0 &&
                  ckpt.iteration % static_cast<std::uint64_t>(options.checkpoint_every) == 0)) {
      const std::string bytes = serialize_checkpoint(ckpt);
      write_file_atomic(checkpoint_path(options.out_dir, ckpt.iteration), bytes);
      if (final) write_file_atomic(options.out_dir / "checkpoint_final.bin", bytes);
    }
  };

  // Environments restart fresh on resume; their seeds depend on the iteration
  // training starts from.
  const std::uint64_t start_iter = ckpt.iteration;
  std::vector<Worker> workers(static_cast<std::size_t>(cfg.workers));
  for (int w = 0; w < cfg.workers; ++w) {
    const std::uint64_t env_seed =
        mix64(options.seed ^ mix64(0xE17 + static_cast<std::uint64_t>(w)) ^ mix64(start_iter));
    workers[w].env = factory(w, env_seed);
    workers[w].obs = workers[w].env->reset();
  }

  const auto batch = static_cast<std::size_t>(cfg.workers) * cfg.rollout_steps;
  Eigen::VectorXd grad(static_cast<Eigen::Index>(PolicyValueNet::kNumParams));

  while (ckpt.total_steps < static_cast<std::uint64_t>(cfg.total_steps)) {
    const std::uint64_t iter = ckpt.iteration + 1;
    const PolicyValueNet snapshot = ckpt.net;

    auto run_worker = [&](int w) {
      rollout(workers[w], snapshot, cfg.rollout_steps,
              master.derive(mix64(iter) ^ (0xAC7ull + static_cast<std::uint64_t>(w))));
    };
    if (options.parallel && cfg.workers > 1) {
      std::vector<std::thread> threads;
      std::vector<std::exception_ptr> errors(workers.size());
      for (int w = 0; w < cfg.workers; ++w)
        threads.emplace_back([&, w] {
          try {
            run_worker(w);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      for (auto& t : threads) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    } else {
      for (int w = 0; w < cfg.workers; ++w) run_worker(w);
    }

    // Pool samples in worker order.
    std::vector<Observation> obs;
    std::vector<Eigen::Vector2d> actions;
    std::vector<double> logp, adv, ret;
    obs.reserve(batch);
    IterationMetrics m;
    m.iteration = iter;
    double reward_sum = 0.0;
    int successes = 0;
    for (Worker& w : workers) {
      const GaeResult g = compute_gae(w.rewards, w.values, w.dones, cfg.gamma, cfg.gae_lambda);
      obs.insert(obs.end(), w.observations.begin(), w.observations.end());
      actions.insert(actions.end(), w.actions.begin(), w.actions.end());
      logp.insert(logp.end(), w.log_probs.begin(), w.log_probs.end());
      adv.insert(adv.end(), g.advantages.begin(), g.advantages.end());
      ret.insert(ret.end(), g.returns.begin(), g.returns.end());
      for (double r : w.finished_rewards) reward_sum += r;
      m.episodes += static_cast<int>(w.finished_rewards.size());
      successes += w.finished_successes;
    }
    m.mean_reward = m.episodes ? reward_sum / m.episodes : std::numeric_limits<double>::quiet_NaN();
    m.success_rate = m.episodes ? static_cast<double>(successes) / m.episodes : 0.0;

    Rng shuffle_rng = master.derive(mix64(iter) ^ 0x5F1ull);
    std::vector<std::size_t> order(batch);
    int updates = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = batch; i > 1; --i) {
        const auto j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
      }
      for (std::size_t start = 0; start < batch; start += cfg.minibatch_size) {
        const std::size_t stop = std::min(batch, start + cfg.minibatch_size);
        Minibatch mb;
        for (std::size_t k = start; k < stop; ++k) {
          const std::size_t s = order[k];
          mb.observations.push_back(obs[s]);
          mb.actions.push_back(actions[s]);
          mb.old_log_probs.push_back(logp[s]);
          mb.advantages.push_back(adv[s]);
          mb.returns.push_back(ret[s]);
        }
        const LossBreakdown loss = ppo_loss(ckpt.net, mb, cfg, &grad);
        if (!std::isfinite(loss.total) || !grad.allFinite()) {
          std::string where = "(no output directory)";
          if (write_files) {
            const auto dump = options.out_dir / "nonfinite_minibatch.csv";
            write_file_atomic(dump, dump_minibatch(mb));
            where = dump.string();
          }
          throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(iter) +
                                   ", epoch " + std::to_string(epoch) + "; minibatch dumped to " +
                                   where);
        }
        adam_step(ckpt.net.params(), grad, ckpt.adam, cfg.learning_rate);
        ckpt.net.clamp_log_std();
        if (epoch == cfg.epochs - 1) {
          m.policy_loss += loss.policy;
          m.value_loss += loss.value;
          m.entropy += loss.entropy;
          m.kl_estimate += loss.approx_kl;
          ++updates;
        }
      }
    }
    if (updates) {
      m.policy_loss /= updates;
      m.value_loss /= updates;
      m.entropy /= updates;
      m.kl_estimate /= updates;
    }

    ckpt.iteration = iter;
    ckpt.total_steps += batch;
    m.steps = ckpt.total_steps;
    result.metrics.push_back(m);
    metrics_text += metrics_csv_row(m);
    if (options.on_iteration) options.on_iteration(m);
    const bool final = ckpt.total_steps >= static_cast<std::uint64_t>(cfg.total_steps);
    if (!final) flush_outputs(false);
  }
  flush_outputs(true);
  return result;
}

}  // namespace asv
