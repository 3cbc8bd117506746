#pragma once

#include <vector>

#include "metacoop/check.hpp"

namespace metacoop {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;  // A_t + v_t, the value-regression targets
};

// Generalized advantage estimation over one fixed-length episode, computed
// in double regardless of the training precision. The bootstrap value after
// the final step is 0 (episodes never truncate).
//   delta_t = r_t + gamma * v_{t+1} - v_t
//   A_t     = sum_{k>=0} (gamma*lambda)^k delta_{t+k}
inline GaeResult compute_gae(const std::vector<float>& rewards, const std::vector<float>& values,
                             double gamma, double lambda) {
  check(rewards.size() == values.size(), "compute_gae: length mismatch");
  const int h = static_cast<int>(rewards.size());
  GaeResult out;
  out.advantages.resize(h);
  out.targets.resize(h);
  double acc = 0.0;
  for (int t = h - 1; t >= 0; --t) {
    const double v_next = t + 1 < h ? static_cast<double>(values[t + 1]) : 0.0;
    const double delta =
        static_cast<double>(rewards[t]) + gamma * v_next - static_cast<double>(values[t]);
    acc = delta + gamma * lambda * acc;
    out.advantages[t] = acc;
    out.targets[t] = acc + static_cast<double>(values[t]);
  }
  return out;
}

}  // namespace metacoop
