#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "metacoop/check.hpp"
#include "metacoop/params.hpp"

namespace metacoop {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moments are kept in the parameter scalar type;
// the per-coordinate update is computed in double to keep the step math
// identical between the f32 and f64 builds of the same trajectory.
template <typename S>
class Adam {
 public:
  Adam(std::size_t n, AdamConfig cfg = {}) : cfg_(cfg), m_(n, S(0)), v_(n, S(0)) {}

  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  void step(ParamSet<S>& params) {
    check(params.size() == m_.size(), "Adam: parameter count mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto& w = params.flat();
    const auto& g = params.grad_flat();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      check(std::isfinite(gi), "Adam: non-finite gradient");
      const double m = cfg_.beta1 * static_cast<double>(m_[i]) + (1.0 - cfg_.beta1) * gi;
      const double v = cfg_.beta2 * static_cast<double>(v_[i]) + (1.0 - cfg_.beta2) * gi * gi;
      m_[i] = static_cast<S>(m);
      v_[i] = static_cast<S>(v);
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      w[i] = static_cast<S>(static_cast<double>(w[i]) -
                            cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps));
    }
    check(params.values_finite(), "Adam: non-finite parameter after update");
    params.sync_transposes();
  }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<S> m_;
  std::vector<S> v_;
};

}  // namespace metacoop
