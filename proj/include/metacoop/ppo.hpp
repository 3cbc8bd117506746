#pragma once

#include <cstdint>
#include <vector>

#include "metacoop/adam.hpp"
#include "metacoop/batch.hpp"
#include "metacoop/gae.hpp"
#include "metacoop/partners.hpp"
#include "metacoop/policy.hpp"
#include "metacoop/tape.hpp"

namespace metacoop {

struct TrainConfig {
  GameId game = GameId::LC;
  ArchVariant arch = ArchVariant::AR_RNN;
  PartnerSplit split;
  int horizon = kDefaultHorizon;
  std::int64_t total_timesteps = 9'000'000;
  double gamma = 0.99;
  double lambda = 0.95;
  double lr = 1e-3;
  double clip_eps = 0.2;
  double c_value = 0.5;
  double c_entropy = 0.01;
  double max_grad_norm = 0.5;  // 0 disables clipping
  int episodes_per_batch = 64;
  int epochs = 4;
  int minibatch_episodes = 16;
  std::uint64_t seed = 0;
  int checkpoint_every_iters = 0;  // 0 = final checkpoint only

  std::int64_t steps_per_batch() const {
    return static_cast<std::int64_t>(episodes_per_batch) * horizon;
  }
  // Trailing partial batch is dropped, never padded.
  std::int64_t iterations() const { return total_timesteps / steps_per_batch(); }

  // The IL baseline trains a self-play pair and touches no partner split.
  void validate(bool require_split = true) const {
    check(horizon >= 1, "TrainConfig: horizon must be >= 1");
    check(total_timesteps >= steps_per_batch(), "TrainConfig: budget smaller than one batch");
    check(gamma > 0.0 && gamma <= 1.0, "TrainConfig: gamma must be in (0, 1]");
    check(lambda >= 0.0 && lambda <= 1.0, "TrainConfig: lambda must be in [0, 1]");
    check(clip_eps > 0.0, "TrainConfig: clip epsilon must be positive");
    check(lr > 0.0, "TrainConfig: learning rate must be positive");
    check(max_grad_norm >= 0.0, "TrainConfig: max_grad_norm must be >= 0");
    check(episodes_per_batch >= 1 && minibatch_episodes >= 1 && epochs >= 1,
          "TrainConfig: batch shape fields must be positive");
    check(episodes_per_batch % minibatch_episodes == 0,
          "TrainConfig: episodes_per_batch must be a multiple of minibatch_episodes");
    if (require_split) {
      check(!split.train.empty(), "TrainConfig: empty training partner list");
      check(split.game_id == game, "TrainConfig: split belongs to a different game");
    }
  }
};

// One training batch: lockstep episodes with full per-step records, partner
// uniformly sampled from the train side per episode (and the net's seat
// sampled uniformly in DSL). Episode indices continue across iterations.
std::vector<LaneResult> collect_rollouts(const GruNetwork<float>& net, const TrainConfig& cfg,
                                         std::int64_t iteration);

// Per-episode GAE followed by batch-level normalization (population mean 0,
// std 1). Advantages and targets land in per-lane step order.
void compute_batch_advantages(const std::vector<LaneResult>& lanes, double gamma, double lambda,
                              std::vector<std::vector<double>>& advantages,
                              std::vector<std::vector<double>>& targets);
void normalize_advantages(std::vector<std::vector<double>>& advantages);

// Everything one PPO minibatch needs, laid out per step for lockstep replay.
template <typename S>
struct MinibatchTensors {
  int batch = 0;
  int horizon = 0;
  int input_dim = 0;
  std::vector<Mat<S>> x;                        // per step: batch x input_dim
  std::vector<std::vector<std::uint8_t>> mask;  // per step: batch x 5
  std::vector<std::vector<int>> action;         // per step: batch
  std::vector<std::vector<S>> old_logp;
  std::vector<std::vector<S>> advantage;
  std::vector<std::vector<S>> target;
};

template <typename S>
MinibatchTensors<S> make_minibatch(const std::vector<LaneResult>& lanes,
                                   const std::vector<std::vector<double>>& advantages,
                                   const std::vector<std::vector<double>>& targets,
                                   const std::vector<int>& episode_ids, int input_dim) {
  MinibatchTensors<S> mb;
  mb.batch = static_cast<int>(episode_ids.size());
  check(mb.batch > 0, "make_minibatch: empty minibatch");
  mb.horizon = static_cast<int>(lanes[episode_ids[0]].action.size());
  mb.input_dim = input_dim;
  mb.x.resize(mb.horizon);
  mb.mask.resize(mb.horizon);
  mb.action.resize(mb.horizon);
  mb.old_logp.resize(mb.horizon);
  mb.advantage.resize(mb.horizon);
  mb.target.resize(mb.horizon);
  for (int t = 0; t < mb.horizon; ++t) {
    mb.x[t].resize(mb.batch, input_dim);
    mb.mask[t].resize(static_cast<std::size_t>(mb.batch) * kNumActions);
    mb.action[t].resize(mb.batch);
    mb.old_logp[t].resize(mb.batch);
    mb.advantage[t].resize(mb.batch);
    mb.target[t].resize(mb.batch);
  }
  for (int b = 0; b < mb.batch; ++b) {
    const int e = episode_ids[b];
    const LaneResult& lane = lanes[e];
    check(static_cast<int>(lane.action.size()) == mb.horizon,
          "make_minibatch: ragged episode lengths");
    for (int t = 0; t < mb.horizon; ++t) {
      const float* src = lane.features.data() + static_cast<std::size_t>(t) * input_dim;
      S* dst = mb.x[t].row(b);
      for (int i = 0; i < input_dim; ++i) dst[i] = static_cast<S>(src[i]);
      for (int c = 0; c < kNumActions; ++c) {
        mb.mask[t][static_cast<std::size_t>(b) * kNumActions + c] =
            lane.mask[static_cast<std::size_t>(t) * kNumActions + c];
      }
      mb.action[t][b] = lane.action[t];
      mb.old_logp[t][b] = static_cast<S>(lane.logp[t]);
      mb.advantage[t][b] = static_cast<S>(advantages[e][t]);
      mb.target[t][b] = static_cast<S>(targets[e][t]);
    }
  }
  return mb;
}

template <typename S>
struct PpoLossVars {
  VarId total = -1;
  VarId policy = -1;
  VarId value = -1;
  VarId entropy = -1;
};

// Replays the minibatch through the network from reset hidden state (full
// BPTT) and assembles the clipped-surrogate objective:
//   total = policy + c_value * value - c_entropy * entropy
// Shared between the f32 trainer and the f64 finite-difference check.
template <typename S>
PpoLossVars<S> build_ppo_loss(Tape<S>& tape, const GruNetwork<S>& net,
                              const MinibatchTensors<S>& mb, S clip_eps, S c_value, S c_entropy) {
  VarId h1 = tape.constant(Mat<S>(mb.batch, kGruUnits));
  VarId h2 = tape.constant(Mat<S>(mb.batch, kGruUnits));
  std::vector<VarId> surrogate, sq_err, ent;
  surrogate.reserve(mb.horizon);
  sq_err.reserve(mb.horizon);
  ent.reserve(mb.horizon);
  for (int t = 0; t < mb.horizon; ++t) {
    const VarId x = tape.constant(mb.x[t]);
    const auto step = net.traced(tape, x, h1, h2);
    h1 = step.h1;
    h2 = step.h2;
    const VarId logp = tape.masked_log_softmax(step.logits, mb.mask[t]);
    const VarId lp_taken = tape.gather_col(logp, mb.action[t]);
    surrogate.push_back(
        tape.ppo_surrogate(lp_taken, mb.old_logp[t], mb.advantage[t], clip_eps));
    sq_err.push_back(tape.squared_error(step.value, mb.target[t]));
    ent.push_back(tape.entropy(logp));
  }
  PpoLossVars<S> out;
  out.policy = tape.mean_accum(surrogate);
  out.value = tape.mean_accum(sq_err);
  out.entropy = tape.mean_accum(ent);
  out.total = tape.combine(out.policy, S(1), out.value, c_value, out.entropy, -c_entropy);
  return out;
}

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

// Full PPO update over one collected batch: per-episode minibatches, a fresh
// shuffle per epoch, one Adam step per minibatch.
UpdateStats ppo_update(ParamSet<float>& params, const GruNetwork<float>& net, Adam<float>& adam,
                       const std::vector<LaneResult>& lanes, const TrainConfig& cfg,
                       std::int64_t iteration);

}  // namespace metacoop
