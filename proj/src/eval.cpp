#include "metacoop/eval.hpp"

#include <algorithm>
#include <cmath>

namespace metacoop {

namespace {

constexpr int kEvalChunk = 512;  // lanes per lockstep pass; results invariant to it

bool in_sorted(const std::vector<int>& sorted_ids, int id) {
  return std::binary_search(sorted_ids.begin(), sorted_ids.end(), id);
}

double mean_and_std(const std::vector<double>& xs, double* out_std) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  if (out_std) *out_std = std::sqrt(var / static_cast<double>(xs.size()));
  return mean;
}

}  // namespace

EvalReport eval_against_partners(const Checkpoint& ckpt, const std::vector<int>& partner_ids,
                                 const EvalOptions& opts) {
  check(!partner_ids.empty(), "eval: empty partner list");
  check(opts.episodes >= 1, "eval: episode count must be >= 1");
  const std::vector<PartnerSpec> pool = enumerate_partners(ckpt.game);
  for (int id : partner_ids) {
    check(id >= 0 && id < static_cast<int>(pool.size()), "eval: partner id out of range");
  }
  GruNetwork<float> net(&ckpt.params);

  EvalReport report;
  report.episodes = opts.episodes;
  report.seeds = {ckpt.seed};
  report.curve.assign(opts.horizon, 0.0);
  std::vector<double> partner_sum(pool.size(), 0.0);
  std::vector<int> partner_count(pool.size(), 0);
  double score_sum = 0.0;

  for (int start = 0; start < opts.episodes; start += kEvalChunk) {
    const int b = std::min(kEvalChunk, opts.episodes - start);
    std::vector<LaneTask> lanes(b);
    for (int i = 0; i < b; ++i) {
      const std::uint64_t episode_index = static_cast<std::uint64_t>(start) + i;
      // Per-episode draw stream: chunk boundaries cannot shift any draw.
      RngStream draw(opts.eval_seed, "eval_draw", episode_index);
      PartnerSpec partner =
          pool[partner_ids[draw.next_below(static_cast<std::uint32_t>(partner_ids.size()))]];
      bool net_is_p0 = true;
      if (ckpt.game == GameId::DSL) {
        const int seat = opts.dsl_net_player >= 0 ? opts.dsl_net_player
                                                  : static_cast<int>(draw.next_below(2));
        net_is_p0 = seat == 0;
        partner.role = net_is_p0 ? PartnerRole::Listener : PartnerRole::Speaker;
      }
      lanes[i].schedule = {{partner, opts.horizon}};
      lanes[i].net_is_p0 = net_is_p0;
      lanes[i].episode_index = episode_index;
    }
    const std::vector<LaneResult> results = run_net_vs_scripted(
        net, ckpt.game, ckpt.arch, lanes, opts.horizon, opts.eval_seed, RecordLevel::Rewards);
    for (const LaneResult& lane : results) {
      const double ret = lane.total_return();
      score_sum += ret;
      partner_sum[lane.partner_id] += ret;
      partner_count[lane.partner_id] += 1;
      for (int t = 0; t < opts.horizon; ++t) report.curve[t] += lane.reward[t];
    }
  }

  report.mean_score = score_sum / opts.episodes;
  for (double& c : report.curve) c /= opts.episodes;
  for (int id : partner_ids) {
    if (partner_count[id] > 0) {
      report.per_partner.emplace_back(id, partner_sum[id] / partner_count[id]);
    }
  }
  return report;
}

EvalReport eval_unseen(const Checkpoint& ckpt, const PartnerSplit& split,
                       const EvalOptions& opts) {
  check(split.game_id == ckpt.game, "eval_unseen: split belongs to a different game");
  check(!split.test.empty(), "eval_unseen: empty test side");
  std::vector<int> train_sorted = split.train;
  std::sort(train_sorted.begin(), train_sorted.end());
  for (int id : split.test) {
    check(!in_sorted(train_sorted, id), "eval_unseen: train/test overlap");
  }
  EvalReport report = eval_against_partners(ckpt, split.test, opts);
  // Test-partner isolation, asserted per evaluated episode.
  for (const auto& [id, mean] : report.per_partner) {
    check(!in_sorted(train_sorted, id), "eval_unseen: sampled a training partner");
  }
  return report;
}

std::vector<double> reward_curve(const Checkpoint& ckpt, const PartnerSplit& split,
                                 const EvalOptions& opts) {
  return eval_unseen(ckpt, split, opts).curve;
}

EvalReport eval_long_horizon(const Checkpoint& ckpt, const PartnerSplit& split,
                             const EvalOptions& opts) {
  check(opts.horizon > kDefaultHorizon, "eval_long_horizon: horizon should exceed 50");
  return eval_unseen(ckpt, split, opts);
}

EvalReport eval_switching(const Checkpoint& ckpt, const PartnerSplit& split,
                          const SwitchSchedule& schedule, int episodes,
                          std::uint64_t eval_seed) {
  check(!schedule.durations.empty(), "eval_switching: empty schedule");
  check(episodes >= 1, "eval_switching: episode count must be >= 1");
  for (int d : schedule.durations) check(d >= 1, "eval_switching: bad segment duration");
  check(split.game_id == ckpt.game, "eval_switching: split belongs to a different game");
  check(!split.test.empty(), "eval_switching: empty test side");

  const std::vector<PartnerSpec> pool = enumerate_partners(ckpt.game);
  GruNetwork<float> net(&ckpt.params);
  const int horizon = schedule.total();
  // LC seats are symmetric; in DSL the net listens while scripted speakers
  // rotate through the schedule, so adaptation shows up in the guesses.
  const bool net_is_p0 = ckpt.game == GameId::LC;

  EvalReport report;
  report.episodes = episodes;
  report.seeds = {ckpt.seed};
  report.curve.assign(horizon, 0.0);
  double score_sum = 0.0;

  for (int start = 0; start < episodes; start += kEvalChunk) {
    const int b = std::min(kEvalChunk, episodes - start);
    std::vector<LaneTask> lanes(b);
    for (int i = 0; i < b; ++i) {
      const std::uint64_t episode_index = static_cast<std::uint64_t>(start) + i;
      RngStream draw(eval_seed, "switch_draw", episode_index);
      lanes[i].net_is_p0 = net_is_p0;
      lanes[i].episode_index = episode_index;
      int prev_id = -1;
      for (int d : schedule.durations) {
        int id = split.test[draw.next_below(static_cast<std::uint32_t>(split.test.size()))];
        while (id == prev_id && split.test.size() > 1) {
          id = split.test[draw.next_below(static_cast<std::uint32_t>(split.test.size()))];
        }
        prev_id = id;
        PartnerSpec partner = pool[id];
        if (ckpt.game == GameId::DSL) partner.role = PartnerRole::Speaker;
        lanes[i].schedule.emplace_back(partner, d);
      }
    }
    const std::vector<LaneResult> results = run_net_vs_scripted(
        net, ckpt.game, ckpt.arch, lanes, horizon, eval_seed, RecordLevel::Rewards);
    for (const LaneResult& lane : results) {
      score_sum += lane.total_return();
      for (int t = 0; t < horizon; ++t) report.curve[t] += lane.reward[t];
    }
  }
  report.mean_score = score_sum / episodes;
  for (double& c : report.curve) c /= episodes;
  return report;
}

namespace {

double run_cell(const Checkpoint& p0, const Checkpoint& p1, int episodes,
                std::uint64_t eval_seed, std::uint64_t cell_index) {
  check(p0.game == p1.game, "crossplay: mixed games in one matrix");
  GruNetwork<float> n0(&p0.params);
  GruNetwork<float> n1(&p1.params);
  auto [r0, r1] = run_net_vs_net({&n0, p0.arch}, {&n1, p1.arch}, p0.game, episodes,
                                 kDefaultHorizon, eval_seed, cell_index * episodes,
                                 RecordLevel::Rewards);
  double sum = 0.0;
  for (const LaneResult& lane : r0) sum += lane.total_return();
  return sum / episodes;
}

std::string seed_label(const Checkpoint& c) { return "seed_" + std::to_string(c.seed); }

}  // namespace

MatrixStats matrix_stats(const CrossPlayMatrix& m) {
  std::vector<double> diag, offdiag, all;
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    for (std::size_t j = 0; j < m.cells[i].size(); ++j) {
      all.push_back(m.cells[i][j]);
      if (m.square()) (i == j ? diag : offdiag).push_back(m.cells[i][j]);
    }
  }
  MatrixStats stats;
  check(!all.empty(), "matrix_stats: empty matrix");
  stats.grid_mean = mean_and_std(all, &stats.grid_std);
  if (!diag.empty()) stats.diag_mean = mean_and_std(diag, &stats.diag_std);
  if (!offdiag.empty()) stats.offdiag_mean = mean_and_std(offdiag, &stats.offdiag_std);
  return stats;
}

CrossPlayMatrix crossplay_self_mrl(const std::vector<Checkpoint>& ckpts, int episodes_per_cell,
                                   std::uint64_t eval_seed) {
  check(!ckpts.empty(), "crossplay: no checkpoints");
  const int n = static_cast<int>(ckpts.size());
  CrossPlayMatrix m;
  m.game = ckpts.front().game;
  for (const auto& c : ckpts) {
    m.row_labels.push_back(seed_label(c));
    m.col_labels.push_back(seed_label(c));
  }
  m.cells.assign(n, std::vector<double>(n, 0.0));
  std::uint64_t cell = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j, ++cell) {
      // DSL rows listen (seat 1) and columns speak (seat 0); LC seats are
      // symmetric and row takes seat 0.
      const Checkpoint& p0 = m.game == GameId::DSL ? ckpts[j] : ckpts[i];
      const Checkpoint& p1 = m.game == GameId::DSL ? ckpts[i] : ckpts[j];
      m.cells[i][j] = run_cell(p0, p1, episodes_per_cell, eval_seed, cell);
    }
  }
  return m;
}

CrossPlayMatrix crossplay_self_il(const std::vector<IlPair>& pairs, int episodes_per_cell,
                                  std::uint64_t eval_seed) {
  check(!pairs.empty(), "crossplay: no IL pairs");
  const int n = static_cast<int>(pairs.size());
  CrossPlayMatrix m;
  m.game = pairs.front().p0.game;
  for (const auto& p : pairs) {
    m.row_labels.push_back(p.label);
    m.col_labels.push_back(p.label);
  }
  m.cells.assign(n, std::vector<double>(n, 0.0));
  std::uint64_t cell = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j, ++cell) {
      // A cell pairs run i's seat-1 net with run j's seat-0 net, so the
      // diagonal is the trained ("seen") pair. DSL keeps row = listener.
      const Checkpoint& p0 = pairs[j].p0;
      const Checkpoint& p1 = pairs[i].p1;
      m.cells[i][j] = run_cell(p0, p1, episodes_per_cell, eval_seed, cell);
    }
  }
  return m;
}

CrossPlayMatrix adhoc_mrl_il(const std::vector<Checkpoint>& mrl, const std::vector<IlPair>& il,
                             int episodes_per_cell, std::uint64_t eval_seed) {
  check(!mrl.empty() && !il.empty(), "adhoc: need both methods' checkpoints");
  CrossPlayMatrix m;
  m.game = mrl.front().game;
  for (const auto& c : mrl) m.row_labels.push_back("mrl_" + seed_label(c));
  for (const auto& p : il) m.col_labels.push_back("il_" + p.label);
  m.cells.assign(mrl.size(), std::vector<double>(il.size(), 0.0));
  std::uint64_t cell = 0;
  for (std::size_t i = 0; i < mrl.size(); ++i) {
    for (std::size_t j = 0; j < il.size(); ++j, ++cell) {
      // The meta agent replaces the IL pair's seat-1 net; in DSL that seat is
      // the listener.
      m.cells[i][j] = run_cell(il[j].p0, mrl[i], episodes_per_cell, eval_seed, cell);
    }
  }
  return m;
}

namespace {

SweepCell make_cell(std::string label, const std::vector<std::uint64_t>& seeds,
                    std::vector<double> per_seed) {
  SweepCell cell;
  cell.label = std::move(label);
  cell.seeds = seeds;
  cell.per_seed = std::move(per_seed);
  cell.mean = mean_and_std(cell.per_seed, &cell.stddev);
  return cell;
}

}  // namespace

std::vector<SweepCell> sweep_quantity(const TrainConfig& base, const std::vector<int>& ks,
                                      const std::vector<std::uint64_t>& seeds, int eval_episodes,
                                      std::uint64_t eval_seed) {
  check(!ks.empty() && !seeds.empty(), "sweep_quantity: empty axis or seed list");
  std::vector<SweepCell> cells;
  for (int k : ks) {
    const PartnerSplit split_k = subset_quantity(base.split, k, base.split.seed);
    std::vector<double> per_seed;
    for (std::uint64_t seed : seeds) {
      TrainConfig cfg = base;
      cfg.split = split_k;
      cfg.seed = seed;
      const TrainResult trained = train_meta(cfg);
      per_seed.push_back(
          eval_unseen(trained.checkpoint, split_k, {eval_episodes, base.horizon, eval_seed, -1})
              .mean_score);
    }
    cells.push_back(make_cell("k=" + std::to_string(k), seeds, std::move(per_seed)));
  }
  return cells;
}

std::vector<SweepCell> sweep_diversity(const TrainConfig& base,
                                       const std::vector<std::uint64_t>& seeds, int eval_episodes,
                                       std::uint64_t eval_seed) {
  check(!seeds.empty(), "sweep_diversity: empty seed list");
  const PartnerSplit random_split = split_random(base.game, 60, base.split.seed);
  const PartnerSplit skewed_split =
      base.game == GameId::LC ? split_skewed_lc() : split_skewed_dsl();

  std::vector<SweepCell> cells;
  for (const auto& [name, split] :
       {std::pair<std::string, const PartnerSplit&>{"random", random_split},
        std::pair<std::string, const PartnerSplit&>{"skewed", skewed_split}}) {
    std::vector<double> test_scores, train_scores;
    for (std::uint64_t seed : seeds) {
      TrainConfig cfg = base;
      cfg.split = split;
      cfg.seed = seed;
      const TrainResult trained = train_meta(cfg);
      const EvalOptions opts{eval_episodes, base.horizon, eval_seed, -1};
      test_scores.push_back(eval_unseen(trained.checkpoint, split, opts).mean_score);
      train_scores.push_back(
          eval_against_partners(trained.checkpoint, split.train, opts).mean_score);
    }
    cells.push_back(make_cell(name + "_test", seeds, std::move(test_scores)));
    cells.push_back(make_cell(name + "_train", seeds, std::move(train_scores)));
  }
  return cells;
}

}  // namespace metacoop
