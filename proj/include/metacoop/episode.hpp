#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "metacoop/game.hpp"
#include "metacoop/partners.hpp"
#include "metacoop/policy.hpp"

namespace metacoop {

std::unique_ptr<TwoPlayerGame> make_game(GameId game);

// Runs one fixed-length episode: env and both agents reset before step 0,
// player 0 acts first within each step, shared reward recorded per step.
// RNG streams are keyed (seed, purpose, episode_index) with purposes "env",
// "sample_p0", "sample_p1", so any episode is reconstructible in isolation.
EpisodeRecord run_episode(TwoPlayerGame& game, Agent& agent_p0, Agent& agent_p1, int horizon,
                          std::uint64_t seed, std::uint64_t episode_index);

// One long episode against a schedule of scripted partners. At each boundary
// the partner (and its pattern position) is replaced; the learning agent's
// recurrent state and the env state carry straight through. `net_player`
// selects which env seat the learning agent occupies.
EpisodeRecord run_episode_with_switching(TwoPlayerGame& game, Agent& agent,
                                         const std::vector<std::pair<PartnerSpec, int>>& schedule,
                                         int net_player, std::uint64_t seed,
                                         std::uint64_t episode_index);

// One JSON object per timestep: {t, obs_a, obs_b, mask_a, act_a, act_b, reward}.
std::string episode_to_jsonl(const EpisodeRecord& record);

}  // namespace metacoop
