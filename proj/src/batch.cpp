#include "metacoop/batch.hpp"

#include <memory>

namespace metacoop {

namespace {

// All lanes whose given env seat is driven by one network: their encoded
// inputs form the rows of one forward batch per step.
class NetGroup {
 public:
  NetGroup(const GruNetwork<float>* net, GameId game, ArchVariant arch, int env_player,
           bool greedy)
      : net_(net), game_(game), arch_(arch), env_player_(env_player), greedy_(greedy) {
    check(net->input_dim() == arch_input_dim(game, arch),
          "batch engine: network input width does not match game/arch");
  }

  void add_lane(int lane, std::uint64_t seed, std::uint64_t episode_index) {
    lanes_.push_back(lane);
    streams_.emplace_back(seed, env_player_ == 0 ? "sample_p0" : "sample_p1", episode_index);
  }

  void start(int horizon, RecordLevel level, std::vector<LaneResult>& results) {
    const int b = static_cast<int>(lanes_.size());
    state_.reset(b);
    x_.resize(b, net_->input_dim());
    prev_action_.assign(b, -1);
    prev_reward_.assign(b, 0.0f);
    pobs_.resize(policy_obs_dim(game_));
    if (level == RecordLevel::Full) {
      for (int r = 0; r < b; ++r) {
        LaneResult& lane = results[lanes_[r]];
        lane.features.reserve(static_cast<std::size_t>(horizon) * net_->input_dim());
        lane.mask.reserve(static_cast<std::size_t>(horizon) * kNumActions);
        lane.action.reserve(horizon);
        lane.logp.reserve(horizon);
        lane.value.reserve(horizon);
      }
    }
  }

  bool empty() const { return lanes_.empty(); }

  // Observe, forward, sample, and submit this group's actions for one step.
  void act(std::vector<std::unique_ptr<TwoPlayerGame>>& envs, RecordLevel level,
           std::vector<LaneResult>& results) {
    const int b = static_cast<int>(lanes_.size());
    std::vector<Mask5> masks(b);
    for (int r = 0; r < b; ++r) {
      TwoPlayerGame& env = *envs[lanes_[r]];
      const std::vector<float> obs = env.observe(env_player_);
      masks[r] = env.legal_mask(env_player_);
      compose_policy_obs(game_, obs, env_player_, pobs_.data());
      encode_input(game_, arch_, pobs_.data(), prev_action_[r], prev_reward_[r], x_.row(r));
    }
    net_->forward(x_, state_, logits_, value_, ws_);
    for (int r = 0; r < b; ++r) {
      unsigned char m8[kNumActions];
      for (int c = 0; c < kNumActions; ++c) m8[c] = masks[r][c] ? 1 : 0;
      float logp[kNumActions];
      kernels::masked_log_softmax_row(logits_.row(r), m8, logp, kNumActions);
      float probs[kNumActions];
      for (int c = 0; c < kNumActions; ++c) probs[c] = std::exp(logp[c]);
      const int action =
          greedy_ ? argmax_masked(probs, masks[r]) : sample_masked(probs, masks[r], streams_[r]);
      envs[lanes_[r]]->submit_action(env_player_, action);
      prev_action_[r] = action;
      if (level == RecordLevel::Full) {
        LaneResult& lane = results[lanes_[r]];
        lane.features.insert(lane.features.end(), x_.row(r), x_.row(r) + x_.cols);
        lane.mask.insert(lane.mask.end(), m8, m8 + kNumActions);
        lane.action.push_back(action);
        lane.logp.push_back(logp[action]);
        lane.value.push_back(value_.at(r, 0));
      }
    }
  }

  void feedback(const std::vector<float>& lane_rewards) {
    for (std::size_t r = 0; r < lanes_.size(); ++r) prev_reward_[r] = lane_rewards[lanes_[r]];
  }

 private:
  const GruNetwork<float>* net_;
  GameId game_;
  ArchVariant arch_;
  int env_player_;
  bool greedy_;
  std::vector<int> lanes_;
  std::vector<RngStream> streams_;
  GruNetwork<float>::State state_;
  GruNetwork<float>::Workspace ws_;
  Mat<float> x_, logits_, value_;
  std::vector<float> pobs_;
  std::vector<int> prev_action_;
  std::vector<float> prev_reward_;
};

// Scripted side bookkeeping: current segment and its local clock per lane.
struct ScriptedLane {
  const std::vector<std::pair<PartnerSpec, int>>* schedule = nullptr;
  int env_player = 1;
  std::size_t segment = 0;
  int local_t = 0;

  const PartnerSpec& partner() const { return (*schedule)[segment].first; }

  void advance() {
    ++local_t;
    if (local_t >= (*schedule)[segment].second && segment + 1 < schedule->size()) {
      ++segment;
      local_t = 0;
    }
  }
};

}  // namespace

std::vector<LaneResult> run_net_vs_scripted(const GruNetwork<float>& net, GameId game,
                                            ArchVariant arch, const std::vector<LaneTask>& lanes,
                                            int horizon, std::uint64_t seed, RecordLevel level,
                                            bool greedy) {
  check(!lanes.empty(), "batch engine: no lanes");
  check(horizon >= 1, "batch engine: horizon must be >= 1");
  const int n = static_cast<int>(lanes.size());

  std::vector<LaneResult> results(n);
  std::vector<std::unique_ptr<TwoPlayerGame>> envs;
  std::vector<RngStream> env_streams;
  std::vector<ScriptedLane> scripted(n);
  NetGroup group_p0(&net, game, arch, 0, greedy);
  NetGroup group_p1(&net, game, arch, 1, greedy);

  for (int i = 0; i < n; ++i) {
    const LaneTask& task = lanes[i];
    check(!task.schedule.empty(), "batch engine: empty partner schedule");
    int total = 0;
    for (const auto& [partner, duration] : task.schedule) {
      check(duration >= 1, "batch engine: segment duration must be >= 1");
      check(partner.game_id == game, "batch engine: partner from a different game");
      total += duration;
    }
    check(total == horizon, "batch engine: schedule durations must sum to the horizon");

    results[i].partner_id = task.schedule.front().first.id;
    results[i].net_is_p0 = task.net_is_p0;
    results[i].episode_index = task.episode_index;
    results[i].reward.reserve(horizon);

    envs.push_back(make_game(game));
    env_streams.emplace_back(seed, "env", task.episode_index);
    envs.back()->reset(env_streams.back());

    scripted[i].schedule = &task.schedule;
    scripted[i].env_player = task.net_is_p0 ? 1 : 0;
    (task.net_is_p0 ? group_p0 : group_p1).add_lane(i, seed, task.episode_index);
  }
  group_p0.start(horizon, level, results);
  group_p1.start(horizon, level, results);

  std::vector<float> step_rewards(n, 0.0f);
  for (int t = 0; t < horizon; ++t) {
    // Seat 0 acts first everywhere (in DSL the listener's observation is the
    // pending message), nets batched per seat, scripted lanes individually.
    if (!group_p0.empty()) group_p0.act(envs, level, results);
    for (int i = 0; i < n; ++i) {
      if (scripted[i].env_player == 0) {
        TwoPlayerGame& env = *envs[i];
        const int a = scripted_action(scripted[i].partner(), scripted[i].local_t, env.observe(0));
        env.submit_action(0, a);
      }
    }
    if (!group_p1.empty()) group_p1.act(envs, level, results);
    for (int i = 0; i < n; ++i) {
      if (scripted[i].env_player == 1) {
        TwoPlayerGame& env = *envs[i];
        const int a = scripted_action(scripted[i].partner(), scripted[i].local_t, env.observe(1));
        env.submit_action(1, a);
      }
    }
    for (int i = 0; i < n; ++i) {
      step_rewards[i] = envs[i]->commit_step(env_streams[i]);
      results[i].reward.push_back(step_rewards[i]);
      scripted[i].advance();
    }
    group_p0.feedback(step_rewards);
    group_p1.feedback(step_rewards);
  }
  return results;
}

std::pair<std::vector<LaneResult>, std::vector<LaneResult>> run_net_vs_net(
    NetSide side_p0, NetSide side_p1, GameId game, int n_lanes, int horizon, std::uint64_t seed,
    std::uint64_t first_episode_index, RecordLevel level, bool greedy) {
  check(side_p0.net != nullptr && side_p1.net != nullptr, "batch engine: null net side");
  check(n_lanes >= 1, "batch engine: no lanes");
  check(horizon >= 1, "batch engine: horizon must be >= 1");

  std::vector<LaneResult> res_p0(n_lanes), res_p1(n_lanes);
  std::vector<std::unique_ptr<TwoPlayerGame>> envs;
  std::vector<RngStream> env_streams;
  NetGroup group_p0(side_p0.net, game, side_p0.arch, 0, greedy);
  NetGroup group_p1(side_p1.net, game, side_p1.arch, 1, greedy);

  for (int i = 0; i < n_lanes; ++i) {
    const std::uint64_t episode_index = first_episode_index + static_cast<std::uint64_t>(i);
    for (LaneResult* r : {&res_p0[i], &res_p1[i]}) {
      r->episode_index = episode_index;
      r->reward.reserve(horizon);
    }
    res_p0[i].net_is_p0 = true;
    res_p1[i].net_is_p0 = false;
    envs.push_back(make_game(game));
    env_streams.emplace_back(seed, "env", episode_index);
    envs.back()->reset(env_streams.back());
    group_p0.add_lane(i, seed, episode_index);
    group_p1.add_lane(i, seed, episode_index);
  }
  group_p0.start(horizon, level, res_p0);
  group_p1.start(horizon, level, res_p1);

  std::vector<float> step_rewards(n_lanes, 0.0f);
  for (int t = 0; t < horizon; ++t) {
    group_p0.act(envs, level, res_p0);
    group_p1.act(envs, level, res_p1);
    for (int i = 0; i < n_lanes; ++i) {
      step_rewards[i] = envs[i]->commit_step(env_streams[i]);
      res_p0[i].reward.push_back(step_rewards[i]);
      res_p1[i].reward.push_back(step_rewards[i]);
    }
    group_p0.feedback(step_rewards);
    group_p1.feedback(step_rewards);
  }
  return {std::move(res_p0), std::move(res_p1)};
}

}  // namespace metacoop
