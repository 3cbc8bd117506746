#pragma once

#include <array>
#include <vector>

#include "metacoop/game.hpp"

namespace metacoop {

// Five levers, two players. Reward 1.0 when both pull the same lever. Within
// each aligned 5-step block a player may not repeat a lever; availability
// resets when the block ends. Stateless apart from time/availability
// bookkeeping, so the observation is the one-hot block position (t mod 5),
// which stays in-distribution at any horizon.
class LeverGame : public TwoPlayerGame {
 public:
  LeverGame();

  const GameSpec& spec() const override { return spec_; }
  void reset(RngStream& rng) override;
  int timestep() const override { return t_; }

  std::vector<float> observe(int player) const override;
  Mask5 legal_mask(int player) const override;
  void submit_action(int player, int action) override;
  float commit_step(RngStream& rng) override;

  // Direct state accessors used by tests.
  const std::array<bool, kNumActions>& used_set(int player) const { return used_[player]; }

 private:
  void reset_state_() {
    t_ = 0;
    used_[0].fill(false);
    used_[1].fill(false);
    pending_ = {-1, -1};
  }

  GameSpec spec_;
  int t_ = 0;
  std::array<std::array<bool, kNumActions>, 2> used_{};
  std::array<int, 2> pending_{-1, -1};
};

}  // namespace metacoop
