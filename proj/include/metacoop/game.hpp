#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "metacoop/check.hpp"
#include "metacoop/rng.hpp"

namespace metacoop {

inline constexpr int kNumActions = 5;
inline constexpr int kNumPlayers = 2;
inline constexpr int kDefaultHorizon = 50;

enum class GameId { LC, DSL };

inline std::string to_string(GameId g) { return g == GameId::LC ? "lc" : "dsl"; }

inline GameId game_from_string(const std::string& s) {
  if (s == "lc" || s == "LC") return GameId::LC;
  if (s == "dsl" || s == "DSL") return GameId::DSL;
  throw ContractError("unknown game id: " + s);
}

struct GameSpec {
  GameId game_id;
  int num_players = kNumPlayers;
  int action_dim = kNumActions;        // per player, both games
  std::array<int, 2> obs_dim;          // per player role
  int default_horizon = kDefaultHorizon;
};

using Mask5 = std::array<bool, kNumActions>;

inline int popcount(const Mask5& m) {
  int n = 0;
  for (bool b : m) n += b ? 1 : 0;
  return n;
}

// Both games fit a shared turn protocol: within one timestep, player 0 acts
// first, then player 1, then the step commits and yields the shared reward.
// LC observations ignore the pending action so the ordering is vacuous there;
// in DSL the listener's observation is the speaker's pending message.
class TwoPlayerGame {
 public:
  virtual ~TwoPlayerGame() = default;

  virtual const GameSpec& spec() const = 0;
  virtual void reset(RngStream& rng) = 0;
  virtual int timestep() const = 0;

  // Observation for `player` at its acting phase of the current step.
  virtual std::vector<float> observe(int player) const = 0;
  virtual Mask5 legal_mask(int player) const = 0;

  // Submit player 0's action, then player 1's, then commit.
  virtual void submit_action(int player, int action) = 0;

  // Applies both submitted actions; returns the shared reward and advances t.
  virtual float commit_step(RngStream& rng) = 0;
};

struct StepOutcome {
  std::vector<float> obs_a;
  std::vector<float> obs_b;
  float reward = 0.0f;  // shared, in {0.0, 1.0}
  bool done = false;
};

struct EpisodeStep {
  std::vector<float> obs_a;
  std::vector<float> obs_b;
  Mask5 mask_a;
  Mask5 mask_b;
  int act_a = 0;
  int act_b = 0;
  float reward = 0.0f;
};

struct EpisodeRecord {
  int horizon = 0;
  std::vector<EpisodeStep> steps;

  double total_return() const {
    double sum = 0.0;
    for (const auto& s : steps) sum += s.reward;
    return sum;
  }
};

}  // namespace metacoop
