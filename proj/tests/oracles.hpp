#pragma once

// Slow, obviously-correct reference implementations shared by the unit tests
// and the acceptance suite.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "asv/ppo.hpp"
#include "asv/rng.hpp"

namespace asv::oracle {

// A_t = sum_l (gamma lambda)^l delta_{t+l}, truncated at the first episode end
// with no bootstrap across it.
inline std::vector<double> gae_double_sum(const std::vector<double>& r,
                                          const std::vector<double>& v,
                                          const std::vector<std::uint8_t>& d, double g,
                                          double lam) {
  const std::size_t n = r.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      const double next = d[k] ? 0.0 : v[k + 1];
      acc += w * (r[k] + g * next - v[k]);
      if (d[k]) break;
      w *= g * lam;
    }
    out[t] = acc;
  }
  return out;
}

// Enumerates every candidate level and every maximal run explicitly.
inline double feasibility(std::span<const double> x, double theta, double width,
                          double range) {
  std::vector<double> levels(x.begin(), x.end());
  std::sort(levels.begin(), levels.end());
  for (double level : levels) {
    bool open = false;
    std::size_t j = 0;
    while (j < x.size()) {
      if (!(x[j] > level)) {
        ++j;
        continue;
      }
      std::size_t k = j;
      while (k < x.size() && x[k] > level) ++k;
      const double run_width = static_cast<double>(k - j) * theta * level +
                               2.0 * (0.5 * theta * level);
      open = open || run_width > width;
      j = k;
    }
    if (!open) return level;
  }
  return range;
}

inline Minibatch random_minibatch(const PolicyValueNet& net, int size, Rng& rng) {
  Minibatch mb;
  for (int j = 0; j < size; ++j) {
    Observation o;
    for (double& x : o) x = rng.gaussian(0.0, 1.0);
    const Eigen::Vector2d mean = net.policy_mean(o);
    const Eigen::Vector2d a = mean + Eigen::Vector2d(rng.gaussian(0, 1), rng.gaussian(0, 1));
    mb.observations.push_back(o);
    mb.actions.push_back(a);
    // Old policy differs slightly so some ratios fall outside the clip band.
    mb.old_log_probs.push_back(gaussian_log_prob(a, mean, net.log_std()) +
                               rng.gaussian(0.0, 0.3));
    mb.advantages.push_back(rng.gaussian(0.0, 1.0));
    mb.returns.push_back(rng.gaussian(0.0, 2.0));
  }
  return mb;
}

}  // namespace asv::oracle
