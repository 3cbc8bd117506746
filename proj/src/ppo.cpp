#include "metacoop/ppo.hpp"

#include <cmath>
#include <numeric>

namespace metacoop {

std::vector<LaneResult> collect_rollouts(const GruNetwork<float>& net, const TrainConfig& cfg,
                                         std::int64_t iteration) {
  const std::vector<PartnerSpec> pool = enumerate_partners(cfg.game);
  RngStream pick(cfg.seed, "partner_sample", static_cast<std::uint64_t>(iteration));

  std::vector<LaneTask> lanes(cfg.episodes_per_batch);
  for (int i = 0; i < cfg.episodes_per_batch; ++i) {
    const int partner_id =
        cfg.split.train[pick.next_below(static_cast<std::uint32_t>(cfg.split.train.size()))];
    PartnerSpec partner = pool[partner_id];
    bool net_is_p0 = true;
    if (cfg.game == GameId::DSL) {
      // The net's seat is sampled per episode; the partner takes the
      // complementary role.
      net_is_p0 = pick.next_below(2) == 0;
      partner.role = net_is_p0 ? PartnerRole::Listener : PartnerRole::Speaker;
    }
    lanes[i].schedule = {{partner, cfg.horizon}};
    lanes[i].net_is_p0 = net_is_p0;
    lanes[i].episode_index =
        static_cast<std::uint64_t>(iteration) * cfg.episodes_per_batch + i;
  }
  return run_net_vs_scripted(net, cfg.game, cfg.arch, lanes, cfg.horizon, cfg.seed,
                             RecordLevel::Full);
}

void compute_batch_advantages(const std::vector<LaneResult>& lanes, double gamma, double lambda,
                              std::vector<std::vector<double>>& advantages,
                              std::vector<std::vector<double>>& targets) {
  advantages.resize(lanes.size());
  targets.resize(lanes.size());
  for (std::size_t e = 0; e < lanes.size(); ++e) {
    GaeResult gae = compute_gae(lanes[e].reward, lanes[e].value, gamma, lambda);
    advantages[e] = std::move(gae.advantages);
    targets[e] = std::move(gae.targets);
  }
}

void normalize_advantages(std::vector<std::vector<double>>& advantages) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& episode : advantages) {
    sum = std::accumulate(episode.begin(), episode.end(), sum);
    n += episode.size();
  }
  check(n > 0, "normalize_advantages: empty batch");
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (const auto& episode : advantages) {
    for (double a : episode) var += (a - mean) * (a - mean);
  }
  const double std = std::sqrt(var / static_cast<double>(n)) + 1e-8;
  for (auto& episode : advantages) {
    for (double& a : episode) a = (a - mean) / std;
  }
}

UpdateStats ppo_update(ParamSet<float>& params, const GruNetwork<float>& net, Adam<float>& adam,
                       const std::vector<LaneResult>& lanes, const TrainConfig& cfg,
                       std::int64_t iteration) {
  std::vector<std::vector<double>> advantages, targets;
  compute_batch_advantages(lanes, cfg.gamma, cfg.lambda, advantages, targets);
  normalize_advantages(advantages);

  const int n_episodes = static_cast<int>(lanes.size());
  const int n_minibatches = n_episodes / cfg.minibatch_episodes;
  std::vector<int> order(n_episodes);

  UpdateStats stats;
  int updates = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle(cfg.seed, "minibatch_shuffle",
                      static_cast<std::uint64_t>(iteration) * cfg.epochs + epoch);
    for (int i = n_episodes - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle.next_below(static_cast<std::uint32_t>(i + 1))]);
    }
    for (int m = 0; m < n_minibatches; ++m) {
      const std::vector<int> episode_ids(order.begin() + m * cfg.minibatch_episodes,
                                         order.begin() + (m + 1) * cfg.minibatch_episodes);
      const auto mb = make_minibatch<float>(lanes, advantages, targets, episode_ids,
                                            net.input_dim());
      Tape<float> tape(&params);
      const auto loss = build_ppo_loss<float>(tape, net, mb, static_cast<float>(cfg.clip_eps),
                                              static_cast<float>(cfg.c_value),
                                              static_cast<float>(cfg.c_entropy));
      const float total = tape.val(loss.total).at(0, 0);
      check(std::isfinite(total), "ppo_update: non-finite loss");
      params.zero_grad();
      tape.backward(loss.total);
      clip_grad_norm(params, cfg.max_grad_norm);
      adam.step(params);

      stats.policy_loss += tape.val(loss.policy).at(0, 0);
      stats.value_loss += tape.val(loss.value).at(0, 0);
      stats.entropy += tape.val(loss.entropy).at(0, 0);
      ++updates;
    }
  }
  stats.policy_loss /= updates;
  stats.value_loss /= updates;
  stats.entropy /= updates;
  return stats;
}

}  // namespace metacoop
