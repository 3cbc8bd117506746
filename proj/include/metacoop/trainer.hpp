#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "metacoop/checkpoint.hpp"
#include "metacoop/ppo.hpp"

namespace metacoop {

struct CurveRow {
  std::int64_t env_timesteps = 0;
  double mean_return = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<CurveRow> curve;
};

// Called every checkpoint_every_iters iterations with a snapshot checkpoint
// and the training curve so far, so long runs stay observable and resumable
// artifacts exist before the final write.
using CheckpointSink =
    std::function<void(const Checkpoint&, std::int64_t iteration, const std::vector<CurveRow>&)>;

// Meta-training: alternate rollout collection against sampled training
// partners with PPO updates until the timestep budget is consumed (trailing
// partial batch dropped). Deterministic per (config, seed).
TrainResult train_meta(const TrainConfig& cfg, const CheckpointSink& periodic = {});

struct IlTrainResult {
  Checkpoint net_p0;  // DSL: the speaker
  Checkpoint net_p1;  // DSL: the listener
  std::vector<CurveRow> curve;
};

using IlCheckpointSink = std::function<void(const Checkpoint& p0, const Checkpoint& p1,
                                            std::int64_t iteration, const std::vector<CurveRow>&)>;

// Independent-learner baseline: two networks without weight sharing play the
// two seats of the same episodes and receive simultaneous PPO updates.
IlTrainResult train_il(const TrainConfig& cfg, const IlCheckpointSink& periodic = {});

}  // namespace metacoop
