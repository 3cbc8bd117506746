#include "metacoop/trainer.hpp"

namespace metacoop {

namespace {

double mean_batch_return(const std::vector<LaneResult>& lanes) {
  double sum = 0.0;
  for (const auto& lane : lanes) sum += lane.total_return();
  return sum / static_cast<double>(lanes.size());
}

Checkpoint make_checkpoint(const TrainConfig& cfg, const ParamSet<float>& params,
                           std::int64_t iterations_done) {
  Checkpoint ckpt;
  ckpt.game = cfg.game;
  ckpt.arch = cfg.arch;
  ckpt.seed = cfg.seed;
  ckpt.timesteps_trained = iterations_done * cfg.steps_per_batch();
  ckpt.params = params;
  return ckpt;
}

}  // namespace

TrainResult train_meta(const TrainConfig& cfg, const CheckpointSink& periodic) {
  cfg.validate();
  ParamSet<float> params =
      init_params<float>(make_policy_layout(arch_input_dim(cfg.game, cfg.arch)), cfg.seed);
  GruNetwork<float> net(&params);
  Adam<float> adam(params.size(), AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});

  TrainResult result;
  const std::int64_t iters = cfg.iterations();
  result.curve.reserve(iters);
  for (std::int64_t iter = 0; iter < iters; ++iter) {
    const std::vector<LaneResult> lanes = collect_rollouts(net, cfg, iter);
    const double mean_return = mean_batch_return(lanes);
    const UpdateStats stats = ppo_update(params, net, adam, lanes, cfg, iter);
    result.curve.push_back(CurveRow{(iter + 1) * cfg.steps_per_batch(), mean_return,
                                    stats.policy_loss, stats.value_loss, stats.entropy});
    if (periodic && cfg.checkpoint_every_iters > 0 &&
        (iter + 1) % cfg.checkpoint_every_iters == 0 && iter + 1 < iters) {
      periodic(make_checkpoint(cfg, params, iter + 1), iter + 1, result.curve);
    }
  }
  result.checkpoint = make_checkpoint(cfg, params, iters);
  return result;
}

IlTrainResult train_il(const TrainConfig& cfg, const IlCheckpointSink& periodic) {
  cfg.validate(/*require_split=*/false);
  const ParamLayout layout = make_policy_layout(arch_input_dim(cfg.game, cfg.arch));
  const std::uint64_t seed_p0 = RngStream(cfg.seed, "il_init_p0", 0).next_u64();
  const std::uint64_t seed_p1 = RngStream(cfg.seed, "il_init_p1", 0).next_u64();
  ParamSet<float> params_p0 = init_params<float>(layout, seed_p0);
  ParamSet<float> params_p1 = init_params<float>(layout, seed_p1);
  GruNetwork<float> net_p0(&params_p0);
  GruNetwork<float> net_p1(&params_p1);
  Adam<float> adam_p0(params_p0.size(), AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
  Adam<float> adam_p1(params_p1.size(), AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});

  IlTrainResult result;
  const std::int64_t iters = cfg.iterations();
  result.curve.reserve(iters);
  for (std::int64_t iter = 0; iter < iters; ++iter) {
    auto [lanes_p0, lanes_p1] = run_net_vs_net(
        {&net_p0, cfg.arch}, {&net_p1, cfg.arch}, cfg.game, cfg.episodes_per_batch, cfg.horizon,
        cfg.seed, static_cast<std::uint64_t>(iter) * cfg.episodes_per_batch, RecordLevel::Full);
    const double mean_return = mean_batch_return(lanes_p0);
    // Both updates replay only their own recorded views, so applying them
    // back-to-back is exactly the simultaneous update.
    const UpdateStats s0 = ppo_update(params_p0, net_p0, adam_p0, lanes_p0, cfg, iter);
    const UpdateStats s1 = ppo_update(params_p1, net_p1, adam_p1, lanes_p1, cfg, iter);
    result.curve.push_back(CurveRow{(iter + 1) * cfg.steps_per_batch(), mean_return,
                                    (s0.policy_loss + s1.policy_loss) / 2,
                                    (s0.value_loss + s1.value_loss) / 2,
                                    (s0.entropy + s1.entropy) / 2});
    if (periodic && cfg.checkpoint_every_iters > 0 &&
        (iter + 1) % cfg.checkpoint_every_iters == 0 && iter + 1 < iters) {
      periodic(make_checkpoint(cfg, params_p0, iter + 1), make_checkpoint(cfg, params_p1, iter + 1),
               iter + 1, result.curve);
    }
  }
  result.net_p0 = make_checkpoint(cfg, params_p0, iters);
  result.net_p1 = make_checkpoint(cfg, params_p1, iters);
  return result;
}

}  // namespace metacoop
