#pragma once

// Synthetic parameter-recovery experiment for the trend fits, shared by the
// unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <vector>

#include "asv/eval.hpp"
#include "asv/rng.hpp"

namespace asv::recovery {

struct Family {
  FitModel model;
  std::vector<double> params;
};

inline std::vector<Family> reference_families() {
  return {{FitModel::LogisticSuccess, {0.705, 0.614}},
          {FitModel::PowerCte, {-4.44, 26.1, 0.086}},
          {FitModel::LoglinearLength, {329.0, 15.3}}};
}

// Log-spaced lambda grid over [1e-6, 1].
inline std::vector<double> lambda_grid(int points) {
  std::vector<double> x;
  for (int k = 0; k < points; ++k) x.push_back(std::pow(10.0, -6.0 + 6.0 * k / (points - 1)));
  return x;
}

inline double max_rel_error(const std::vector<double>& est, const std::vector<double>& truth) {
  double worst = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j)
    worst = std::max(worst, std::abs(est[j] - truth[j]) / std::abs(truth[j]));
  return worst;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct NoisyOutcome {
  // Relative error of the per-parameter median estimate (worst parameter).
  double median_estimate_error = 0.0;
  // Median over trials of each trial's worst relative error.
  double median_trial_error = 0.0;
};

inline NoisyOutcome noisy_recovery(const Family& f, int trials, double noise, std::uint64_t seed) {
  const std::vector<double> x = lambda_grid(61);
  Rng rng(seed);
  std::vector<std::vector<double>> per_param(f.params.size());
  std::vector<double> trial_err;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> y;
    for (double xi : x)
      y.push_back(fit_model_eval(f.model, f.params, xi) * (1.0 + rng.gaussian(0.0, noise)));
    const FitResult r = lm_fit(f.model, x, y);
    for (std::size_t j = 0; j < f.params.size(); ++j) per_param[j].push_back(r.params[j]);
    trial_err.push_back(max_rel_error(r.params, f.params));
  }
  std::vector<double> med;
  for (auto& p : per_param) med.push_back(median(p));
  return {max_rel_error(med, f.params), median(trial_err)};
}

}  // namespace asv::recovery
