#pragma once

#include <vector>

#include "metacoop/game.hpp"

namespace metacoop {

inline constexpr int kSpeaker = 0;
inline constexpr int kListener = 1;

// One rewarded landmark is resampled uniformly at the start of every
// timestep. The speaker observes the landmark and emits a one-hot message;
// the listener observes that message and picks a landmark. Both players get
// reward 1.0 when the pick is correct. Player 0 is always the speaker.
//
// Observations are the bare five-dim payload (landmark or message one-hot);
// role conditioning is the policy layer's concern.
class SpeakerListenerGame : public TwoPlayerGame {
 public:
  SpeakerListenerGame();

  const GameSpec& spec() const override { return spec_; }
  void reset(RngStream& rng) override;
  int timestep() const override { return t_; }

  std::vector<float> observe(int player) const override;
  Mask5 legal_mask(int player) const override;
  void submit_action(int player, int action) override;
  float commit_step(RngStream& rng) override;

  int rewarded_landmark() const { return landmark_; }
  bool message_pending() const { return message_ >= 0; }

 private:
  GameSpec spec_;
  int t_ = 0;
  int landmark_ = 0;   // resampled every step
  int message_ = -1;   // -1 until the speaker acts
  int guess_ = -1;
};

}  // namespace metacoop
