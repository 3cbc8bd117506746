#include "metacoop/episode.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "metacoop/lever_game.hpp"
#include "metacoop/speaker_listener.hpp"

namespace metacoop {

std::unique_ptr<TwoPlayerGame> make_game(GameId game) {
  if (game == GameId::LC) return std::make_unique<LeverGame>();
  return std::make_unique<SpeakerListenerGame>();
}

namespace {

// One step of the shared turn protocol; local timesteps let the switching
// runner restart a partner's pattern position without touching the env.
EpisodeStep play_step(TwoPlayerGame& game, Agent& agent_p0, Agent& agent_p1, int t_p0, int t_p1,
                      RngStream& env_rng, RngStream& p0_rng, RngStream& p1_rng) {
  EpisodeStep step;
  step.obs_a = game.observe(0);
  step.mask_a = game.legal_mask(0);
  step.act_a = agent_p0.act(t_p0, step.obs_a, step.mask_a, p0_rng);
  check(step.act_a >= 0 && step.act_a < kNumActions, "run_episode: player 0 action out of range");
  game.submit_action(0, step.act_a);

  step.obs_b = game.observe(1);
  step.mask_b = game.legal_mask(1);
  step.act_b = agent_p1.act(t_p1, step.obs_b, step.mask_b, p1_rng);
  check(step.act_b >= 0 && step.act_b < kNumActions, "run_episode: player 1 action out of range");
  game.submit_action(1, step.act_b);

  step.reward = game.commit_step(env_rng);
  agent_p0.feedback(step.act_a, step.reward);
  agent_p1.feedback(step.act_b, step.reward);
  return step;
}

}  // namespace

EpisodeRecord run_episode(TwoPlayerGame& game, Agent& agent_p0, Agent& agent_p1, int horizon,
                          std::uint64_t seed, std::uint64_t episode_index) {
  check(horizon >= 1, "run_episode: horizon must be >= 1");
  RngStream env_rng(seed, "env", episode_index);
  RngStream p0_rng(seed, "sample_p0", episode_index);
  RngStream p1_rng(seed, "sample_p1", episode_index);

  game.reset(env_rng);
  agent_p0.begin_episode();
  agent_p1.begin_episode();

  EpisodeRecord record;
  record.horizon = horizon;
  record.steps.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    record.steps.push_back(play_step(game, agent_p0, agent_p1, t, t, env_rng, p0_rng, p1_rng));
  }
  return record;
}

EpisodeRecord run_episode_with_switching(TwoPlayerGame& game, Agent& agent,
                                         const std::vector<std::pair<PartnerSpec, int>>& schedule,
                                         int net_player, std::uint64_t seed,
                                         std::uint64_t episode_index) {
  check(!schedule.empty(), "run_episode_with_switching: empty schedule");
  check(net_player == 0 || net_player == 1, "run_episode_with_switching: bad net player");

  RngStream env_rng(seed, "env", episode_index);
  RngStream p0_rng(seed, "sample_p0", episode_index);
  RngStream p1_rng(seed, "sample_p1", episode_index);

  game.reset(env_rng);
  agent.begin_episode();

  EpisodeRecord record;
  record.horizon = 0;
  for (const auto& [partner, duration] : schedule) {
    check(duration >= 1, "run_episode_with_switching: segment duration must be >= 1");
    record.horizon += duration;
  }
  record.steps.reserve(record.horizon);

  int t = 0;
  for (const auto& [partner, duration] : schedule) {
    ScriptedAgent scripted(partner);
    scripted.begin_episode();
    for (int local = 0; local < duration; ++local, ++t) {
      // The scripted side's pattern position restarts at each boundary; the
      // learning agent keeps its global clock and hidden state.
      if (net_player == 0) {
        record.steps.push_back(play_step(game, agent, scripted, t, local, env_rng, p0_rng, p1_rng));
      } else {
        record.steps.push_back(play_step(game, scripted, agent, local, t, env_rng, p0_rng, p1_rng));
      }
    }
  }
  return record;
}

std::string episode_to_jsonl(const EpisodeRecord& record) {
  std::ostringstream out;
  for (std::size_t t = 0; t < record.steps.size(); ++t) {
    const EpisodeStep& s = record.steps[t];
    std::vector<int> mask;
    mask.reserve(kNumActions);
    for (bool b : s.mask_a) mask.push_back(b ? 1 : 0);
    const nlohmann::json line{{"t", t},       {"obs_a", s.obs_a}, {"obs_b", s.obs_b},
                              {"mask_a", mask}, {"act_a", s.act_a}, {"act_b", s.act_b},
                              {"reward", s.reward}};
    out << line.dump() << '\n';
  }
  return out.str();
}

}  // namespace metacoop
