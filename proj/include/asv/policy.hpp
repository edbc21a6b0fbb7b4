#pragma once

// Actor and critic networks for the fixed 32 -> 64 -> 64 -> {2, 1} tanh
// architecture. All parameters live in one flat vector so that the optimizer,
// the checkpoint writer and gradient checks can treat them uniformly.
//
// Flat layout, each matrix stored column-major:
//   policy W1 (64x32), b1 (64), W2 (64x64), b2 (64), W3 (2x64), b3 (2),
//   log_std (2),
//   value  W1 (64x32), b1 (64), W2 (64x64), b2 (64), W3 (1x64), b3 (1).

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <span>

#include "asv/env.hpp"
#include "asv/rng.hpp"

namespace asv {

inline constexpr int kHidden = 64;
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Per-feature divisors applied to observations before the first layer.
using FeatureScaling = std::array<double, kObservationSize>;
FeatureScaling default_feature_scaling(double max_speed, double cross_track_scale);

struct LayerOffsets {
  std::size_t w1, b1, w2, b2, w3, b3;
};

class PolicyValueNet {
 public:
  static constexpr int kOutPolicy = kActionSize;
  static constexpr LayerOffsets kPolicy = {
      0, 64 * 32, 64 * 32 + 64, 64 * 32 + 64 + 64 * 64, 64 * 32 + 128 + 64 * 64,
      64 * 32 + 128 + 64 * 64 + 2 * 64};
  static constexpr std::size_t kLogStd = kPolicy.b3 + 2;
  static constexpr std::size_t kValueBase = kLogStd + 2;
  static constexpr LayerOffsets kValue = {
      kValueBase,
      kValueBase + 64 * 32,
      kValueBase + 64 * 32 + 64,
      kValueBase + 64 * 32 + 64 + 64 * 64,
      kValueBase + 64 * 32 + 128 + 64 * 64,
      kValueBase + 64 * 32 + 128 + 64 * 64 + 64};
  static constexpr std::size_t kNumParams = kValue.b3 + 1;

  PolicyValueNet();
  explicit PolicyValueNet(FeatureScaling scaling);

  // Orthogonal initialization with gain 1 for hidden layers and 0.01 for the
  // output layers; zero biases and log_std.
  void initialize(Rng& rng);

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  const FeatureScaling& scaling() const { return scaling_; }
  void set_scaling(const FeatureScaling& s) { scaling_ = s; }

  Eigen::Vector2d log_std() const { return params_.segment<2>(kLogStd); }
  void clamp_log_std();

  // Scaled input column for one observation.
  Eigen::VectorXd scale(const Observation& obs) const;

  Eigen::Vector2d policy_mean(const Observation& obs) const;
  double value(const Observation& obs) const;

 private:
  Eigen::VectorXd params_;
  FeatureScaling scaling_;
};

// Activations of one trunk for a batch (columns are samples).
struct TrunkPass {
  Eigen::MatrixXd input;
  Eigen::MatrixXd h1;
  Eigen::MatrixXd h2;
  Eigen::MatrixXd out;
};

TrunkPass trunk_forward(const Eigen::VectorXd& params, const LayerOffsets& off,
                        int out_dim, const Eigen::MatrixXd& input);
// Accumulates parameter gradients for d loss / d out into `grad`.
void trunk_backward(const Eigen::VectorXd& params, const LayerOffsets& off, int out_dim,
                    const TrunkPass& pass, const Eigen::MatrixXd& d_out,
                    Eigen::VectorXd& grad);

// Diagonal Gaussian policy helpers.
double gaussian_log_prob(const Eigen::Vector2d& action, const Eigen::Vector2d& mean,
                         const Eigen::Vector2d& log_std);
double gaussian_entropy(const Eigen::Vector2d& log_std);

struct SampledAction {
  Eigen::Vector2d action;
  double log_prob;
};
SampledAction sample_action(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                            Rng& rng);

}  // namespace asv
