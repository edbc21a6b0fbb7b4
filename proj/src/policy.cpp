#include "asv/policy.hpp"

#include <cmath>
#include <numbers>

namespace asv {

namespace {

using MapMat = Eigen::Map<const Eigen::MatrixXd>;
using MapVec = Eigen::Map<const Eigen::VectorXd>;

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

void orthogonal_fill(Eigen::VectorXd& params, std::size_t offset, int rows, int cols,
                     double gain, Rng& rng) {
  Eigen::MatrixXd a(std::max(rows, cols), std::min(rows, cols));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = rng.gaussian(0.0, 1.0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  // Sign correction makes the distribution uniform over orthogonal matrices.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  Eigen::MatrixXd w = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
  Eigen::Map<Eigen::MatrixXd>(params.data() + offset, rows, cols) = gain * w;
}

}  // namespace

FeatureScaling default_feature_scaling(double max_speed, double cross_track_scale) {
  FeatureScaling s;
  s.fill(1.0);
  s[0] = max_speed;
  s[1] = max_speed;
  s[5] = cross_track_scale;
  return s;
}

PolicyValueNet::PolicyValueNet() : PolicyValueNet(default_feature_scaling(2.0, 100.0)) {}

PolicyValueNet::PolicyValueNet(FeatureScaling scaling)
    : params_(Eigen::VectorXd::Zero(kNumParams)), scaling_(scaling) {}

void PolicyValueNet::initialize(Rng& rng) {
  params_.setZero();
  for (const auto& [off, out_dim] : {std::pair{kPolicy, kOutPolicy}, std::pair{kValue, 1}}) {
    orthogonal_fill(params_, off.w1, kHidden, kObservationSize, 1.0, rng);
    orthogonal_fill(params_, off.w2, kHidden, kHidden, 1.0, rng);
    orthogonal_fill(params_, off.w3, out_dim, kHidden, 0.01, rng);
  }
}

void PolicyValueNet::clamp_log_std() {
  for (std::size_t k = 0; k < 2; ++k)
    params_[kLogStd + k] = std::clamp(params_[kLogStd + k], kLogStdMin, kLogStdMax);
}

Eigen::VectorXd PolicyValueNet::scale(const Observation& obs) const {
  Eigen::VectorXd x(kObservationSize);
  for (int i = 0; i < kObservationSize; ++i) x[i] = obs[i] / scaling_[i];
  return x;
}

Eigen::Vector2d PolicyValueNet::policy_mean(const Observation& obs) const {
  const TrunkPass p = trunk_forward(params_, kPolicy, kOutPolicy, scale(obs));
  return p.out.col(0);
}

double PolicyValueNet::value(const Observation& obs) const {
  return trunk_forward(params_, kValue, 1, scale(obs)).out(0, 0);
}

TrunkPass trunk_forward(const Eigen::VectorXd& params, const LayerOffsets& off,
                        int out_dim, const Eigen::MatrixXd& input) {
  const MapMat w1(params.data() + off.w1, kHidden, kObservationSize);
  const MapVec b1(params.data() + off.b1, kHidden);
  const MapMat w2(params.data() + off.w2, kHidden, kHidden);
  const MapVec b2(params.data() + off.b2, kHidden);
  const MapMat w3(params.data() + off.w3, out_dim, kHidden);
  const MapVec b3(params.data() + off.b3, out_dim);
  TrunkPass p;
  p.input = input;
  p.h1 = ((w1 * input).colwise() + b1).array().tanh();
  p.h2 = ((w2 * p.h1).colwise() + b2).array().tanh();
  p.out = (w3 * p.h2).colwise() + b3;
  return p;
}

void trunk_backward(const Eigen::VectorXd& params, const LayerOffsets& off, int out_dim,
                    const TrunkPass& pass, const Eigen::MatrixXd& d_out,
                    Eigen::VectorXd& grad) {
  const MapMat w2(params.data() + off.w2, kHidden, kHidden);
  const MapMat w3(params.data() + off.w3, out_dim, kHidden);
  Eigen::Map<Eigen::MatrixXd>(grad.data() + off.w3, out_dim, kHidden) +=
      d_out * pass.h2.transpose();
  Eigen::Map<Eigen::VectorXd>(grad.data() + off.b3, out_dim) += d_out.rowwise().sum();
  const Eigen::MatrixXd dz2 =
      ((w3.transpose() * d_out).array() * (1.0 - pass.h2.array().square())).matrix();
  Eigen::Map<Eigen::MatrixXd>(grad.data() + off.w2, kHidden, kHidden) +=
      dz2 * pass.h1.transpose();
  Eigen::Map<Eigen::VectorXd>(grad.data() + off.b2, kHidden) += dz2.rowwise().sum();
  const Eigen::MatrixXd dz1 =
      ((w2.transpose() * dz2).array() * (1.0 - pass.h1.array().square())).matrix();
  Eigen::Map<Eigen::MatrixXd>(grad.data() + off.w1, kHidden, kObservationSize) +=
      dz1 * pass.input.transpose();
  Eigen::Map<Eigen::VectorXd>(grad.data() + off.b1, kHidden) += dz1.rowwise().sum();
}

double gaussian_log_prob(const Eigen::Vector2d& action, const Eigen::Vector2d& mean,
                         const Eigen::Vector2d& log_std) {
  double lp = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double z = (action[k] - mean[k]) * std::exp(-log_std[k]);
    lp += -0.5 * z * z - log_std[k] - 0.5 * kLog2Pi;
  }
  return lp;
}

double gaussian_entropy(const Eigen::Vector2d& log_std) {
  return log_std.sum() + 2.0 * 0.5 * (kLog2Pi + 1.0);
}

SampledAction sample_action(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                            Rng& rng) {
  Eigen::Vector2d a;
  for (int k = 0; k < 2; ++k) a[k] = mean[k] + std::exp(log_std[k]) * rng.gaussian(0.0, 1.0);
  return {a, gaussian_log_prob(a, mean, log_std)};
}

}  // namespace asv
