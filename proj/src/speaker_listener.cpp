#include "metacoop/speaker_listener.hpp"

#include <string>

namespace metacoop {

SpeakerListenerGame::SpeakerListenerGame() {
  spec_.game_id = GameId::DSL;
  spec_.obs_dim = {kNumActions, kNumActions};
}

void SpeakerListenerGame::reset(RngStream& rng) {
  t_ = 0;
  landmark_ = static_cast<int>(rng.next_below(kNumActions));
  message_ = -1;
  guess_ = -1;
}

std::vector<float> SpeakerListenerGame::observe(int player) const {
  check(player == kSpeaker || player == kListener, "SpeakerListenerGame::observe: bad player");
  std::vector<float> obs(kNumActions, 0.0f);
  if (player == kSpeaker) {
    obs[landmark_] = 1.0f;
  } else {
    check(message_ >= 0, "SpeakerListenerGame: listener observation requested before message set");
    obs[message_] = 1.0f;
  }
  return obs;
}

Mask5 SpeakerListenerGame::legal_mask(int /*player*/) const {
  Mask5 mask;
  mask.fill(true);
  return mask;
}

void SpeakerListenerGame::submit_action(int player, int action) {
  check(action >= 0 && action < kNumActions,
        "SpeakerListenerGame: action out of range: " + std::to_string(action));
  if (player == kSpeaker) {
    check(message_ < 0, "SpeakerListenerGame: speaker acted twice in one step");
    message_ = action;
  } else {
    check(message_ >= 0, "SpeakerListenerGame: listener acted before the speaker");
    check(guess_ < 0, "SpeakerListenerGame: listener acted twice in one step");
    guess_ = action;
  }
}

float SpeakerListenerGame::commit_step(RngStream& rng) {
  check(message_ >= 0 && guess_ >= 0, "SpeakerListenerGame: commit before both actions");
  const float reward = guess_ == landmark_ ? 1.0f : 0.0f;
  ++t_;
  landmark_ = static_cast<int>(rng.next_below(kNumActions));
  message_ = -1;
  guess_ = -1;
  return reward;
}

}  // namespace metacoop
