#include "metacoop/lever_game.hpp"

#include <string>

namespace metacoop {

LeverGame::LeverGame() {
  spec_.game_id = GameId::LC;
  spec_.obs_dim = {kNumActions, kNumActions};
  reset_state_();
}

void LeverGame::reset(RngStream& /*rng*/) { reset_state_(); }

std::vector<float> LeverGame::observe(int player) const {
  check(player == 0 || player == 1, "LeverGame::observe: bad player");
  std::vector<float> obs(kNumActions, 0.0f);
  obs[t_ % kNumActions] = 1.0f;
  return obs;
}

Mask5 LeverGame::legal_mask(int player) const {
  check(player == 0 || player == 1, "LeverGame::legal_mask: bad player");
  Mask5 mask;
  for (int a = 0; a < kNumActions; ++a) mask[a] = !used_[player][a];
  return mask;
}

void LeverGame::submit_action(int player, int action) {
  check(player == 0 || player == 1, "LeverGame::submit_action: bad player");
  check(action >= 0 && action < kNumActions,
        "LeverGame: action out of range: " + std::to_string(action));
  check(!used_[player][action],
        "LeverGame: lever " + std::to_string(action) + " already used by player " +
            std::to_string(player) + " in the current block");
  check(pending_[player] < 0, "LeverGame: player acted twice in one step");
  pending_[player] = action;
}

float LeverGame::commit_step(RngStream& /*rng*/) {
  check(pending_[0] >= 0 && pending_[1] >= 0, "LeverGame: commit before both actions");
  const float reward = pending_[0] == pending_[1] ? 1.0f : 0.0f;
  used_[0][pending_[0]] = true;
  used_[1][pending_[1]] = true;
  pending_ = {-1, -1};
  ++t_;
  if (t_ % kNumActions == 0) {
    used_[0].fill(false);
    used_[1].fill(false);
  }
  return reward;
}

}  // namespace metacoop
