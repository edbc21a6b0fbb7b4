#include "asv/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "asv/errors.hpp"

namespace asv {

void PPOConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must lie in (0, 1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0))
    throw ConfigError("ppo: gae_lambda must lie in (0, 1]");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("ppo: clip_eps must lie in (0, 1)");
  if (!(c1 >= 0.0 && c2 >= 0.0)) throw ConfigError("ppo: c1 and c2 must be >= 0");
  if (!(learning_rate >= 0.0)) throw ConfigError("ppo: learning_rate must be >= 0");
  if (rollout_steps < 1 || workers < 1 || minibatch_size < 1 || epochs < 1)
    throw ConfigError("ppo: rollout_steps, workers, minibatch_size, epochs must be >= 1");
  if (total_steps < 0) throw ConfigError("ppo: total_steps must be >= 0");
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double gamma, double gae_lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n)
    throw std::invalid_argument("compute_gae: inconsistent lengths");
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double keep = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * values[i + 1] * keep - values[i];
    running = delta + gamma * gae_lambda * keep * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

LossBreakdown ppo_loss(const PolicyValueNet& net, const Minibatch& batch,
                       const PPOConfig& cfg, Eigen::VectorXd* grad) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  if (b == 0) throw std::invalid_argument("ppo_loss: empty minibatch");
  const Eigen::VectorXd& params = net.params();

  Eigen::MatrixXd input(kObservationSize, b);
  for (Eigen::Index j = 0; j < b; ++j) input.col(j) = net.scale(batch.observations[j]);

  const TrunkPass pi = trunk_forward(params, PolicyValueNet::kPolicy, kActionSize, input);
  const TrunkPass vf = trunk_forward(params, PolicyValueNet::kValue, 1, input);
  const Eigen::Vector2d log_std = net.log_std();
  const Eigen::Array2d inv_std = (-log_std.array()).exp();

  std::vector<double> adv(batch.advantages);
  if (cfg.normalize_advantages && b > 1) {
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(b);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(b));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  LossBreakdown loss;
  const double inv_b = 1.0 / static_cast<double>(b);
  Eigen::MatrixXd d_mean(kActionSize, b);
  Eigen::MatrixXd d_value(1, b);
  Eigen::Vector2d d_log_std = Eigen::Vector2d::Zero();

  for (Eigen::Index j = 0; j < b; ++j) {
    const Eigen::Vector2d mean = pi.out.col(j);
    const Eigen::Array2d z = (batch.actions[j] - mean).array() * inv_std;
    const double logp = gaussian_log_prob(batch.actions[j], mean, log_std);
    const double ratio = std::exp(logp - batch.old_log_probs[j]);
    const double a = adv[j];
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    const double unclipped_term = ratio * a;
    const double clipped_term = clipped * a;
    const bool unclipped_active = unclipped_term <= clipped_term;
    loss.policy -= std::min(unclipped_term, clipped_term) * inv_b;
    loss.approx_kl += (batch.old_log_probs[j] - logp) * inv_b;
    if (std::fabs(ratio - 1.0) > cfg.clip_eps) loss.clip_fraction += inv_b;

    // d loss / d logp; the clipped branch is constant in the parameters.
    const double d_logp = unclipped_active ? -unclipped_term * inv_b : 0.0;
    d_mean.col(j) = (d_logp * z * inv_std).matrix();
    d_log_std += (d_logp * (z.square() - 1.0)).matrix();

    const double err = vf.out(0, j) - batch.returns[j];
    loss.value += err * err * inv_b;
    d_value(0, j) = cfg.c1 * 2.0 * err * inv_b;
  }
  loss.entropy = gaussian_entropy(log_std);
  loss.total = loss.policy + cfg.c1 * loss.value - cfg.c2 * loss.entropy;

  if (grad) {
    grad->setZero(static_cast<Eigen::Index>(PolicyValueNet::kNumParams));
    trunk_backward(params, PolicyValueNet::kPolicy, kActionSize, pi, d_mean, *grad);
    trunk_backward(params, PolicyValueNet::kValue, 1, vf, d_value, *grad);
    // Entropy of a diagonal Gaussian has unit derivative in each log_std.
    grad->segment<2>(PolicyValueNet::kLogStd) += d_log_std - cfg.c2 * Eigen::Vector2d::Ones();
  }
  return loss;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               double learning_rate) {
  if (state.m.size() != params.size()) state = AdamState::zeros(static_cast<std::size_t>(params.size()));
  ++state.t;
  state.m = kAdamBeta1 * state.m + (1.0 - kAdamBeta1) * grad;
  state.v = kAdamBeta2 * state.v + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEps);
  }
}

}  // namespace asv
