#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metacoop/batch.hpp"
#include "metacoop/checkpoint.hpp"
#include "metacoop/partners.hpp"
#include "metacoop/trainer.hpp"

namespace metacoop {

struct EvalReport {
  double mean_score = 0.0;
  std::vector<std::pair<int, double>> per_partner;  // partner id -> mean score
  std::vector<double> curve;                        // per-timestep reward chance
  int episodes = 0;
  std::vector<std::uint64_t> seeds;  // checkpoint seeds aggregated here
};

struct EvalOptions {
  int episodes = 18000;
  int horizon = kDefaultHorizon;
  std::uint64_t eval_seed = 0;
  // DSL seat for the evaluated net: 0 speaker, 1 listener, -1 sampled per
  // episode (the training distribution). Ignored for LC (always seat 0).
  int dsl_net_player = -1;
};

// Scores a checkpoint against an explicit partner list (ids into the
// lexicographic pool). Partner and DSL seat draws are keyed per episode, so
// results are independent of lane batching.
EvalReport eval_against_partners(const Checkpoint& ckpt, const std::vector<int>& partner_ids,
                                 const EvalOptions& opts);

// Unseen-partner protocol: partners sampled uniformly from the split's test
// side; errors if the split is malformed and asserts per episode that no
// training partner is ever used.
EvalReport eval_unseen(const Checkpoint& ckpt, const PartnerSplit& split, const EvalOptions& opts);

// The per-timestep reward-chance curve of eval_unseen, indexed 0..horizon-1.
std::vector<double> reward_curve(const Checkpoint& ckpt, const PartnerSplit& split,
                                 const EvalOptions& opts);

// The 50-step policy dropped into longer episodes (e.g. 500 steps), hidden
// state reset only at t=0.
EvalReport eval_long_horizon(const Checkpoint& ckpt, const PartnerSplit& split,
                             const EvalOptions& opts);

// Within one episode the scripted partner is swapped per schedule; the
// net's hidden state and the env run straight through. Each segment's
// partner is drawn from the test side, never repeating its predecessor.
struct SwitchSchedule {
  std::vector<int> durations;  // e.g. LC: ten 50s; DSL: 50,200,50,200

  int total() const {
    int sum = 0;
    for (int d : durations) sum += d;
    return sum;
  }
};

EvalReport eval_switching(const Checkpoint& ckpt, const PartnerSplit& split,
                          const SwitchSchedule& schedule, int episodes, std::uint64_t eval_seed);

// Cross-play matrices. Cells are mean scores over episodes_per_cell
// episodes of one fixed pairing. In DSL a row agent is the listener and a
// column agent the speaker; LC pairing is seat 0 = row.
struct CrossPlayMatrix {
  GameId game = GameId::LC;
  std::vector<std::string> row_labels, col_labels;
  std::vector<std::vector<double>> cells;

  bool square() const { return row_labels.size() == col_labels.size(); }
};

struct MatrixStats {
  double diag_mean = 0.0, diag_std = 0.0;
  double offdiag_mean = 0.0, offdiag_std = 0.0;
  double grid_mean = 0.0, grid_std = 0.0;
};

MatrixStats matrix_stats(const CrossPlayMatrix& m);

// The IL baseline's two unshared networks for the two env seats.
struct IlPair {
  Checkpoint p0;  // DSL speaker
  Checkpoint p1;  // DSL listener
  std::string label;
};

CrossPlayMatrix crossplay_self_mrl(const std::vector<Checkpoint>& ckpts, int episodes_per_cell,
                                   std::uint64_t eval_seed);
CrossPlayMatrix crossplay_self_il(const std::vector<IlPair>& pairs, int episodes_per_cell,
                                  std::uint64_t eval_seed);
// Rows = meta-RL seeds, columns = IL seeds. DSL: meta-RL listens, IL speaks.
CrossPlayMatrix adhoc_mrl_il(const std::vector<Checkpoint>& mrl, const std::vector<IlPair>& il,
                             int episodes_per_cell, std::uint64_t eval_seed);

// Population sweeps: one cell per axis value, each trained per seed with
// the same budget and scored on its split's test side (plus train side for
// the diversity axis, whose comparison needs both).
struct SweepCell {
  std::string label;
  double mean = 0.0;
  double stddev = 0.0;  // across seeds
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed;
};

std::vector<SweepCell> sweep_quantity(const TrainConfig& base, const std::vector<int>& ks,
                                      const std::vector<std::uint64_t>& seeds, int eval_episodes,
                                      std::uint64_t eval_seed);
std::vector<SweepCell> sweep_diversity(const TrainConfig& base,
                                       const std::vector<std::uint64_t>& seeds, int eval_episodes,
                                       std::uint64_t eval_seed);

}  // namespace metacoop
