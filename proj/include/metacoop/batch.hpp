#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "metacoop/episode.hpp"
#include "metacoop/gru.hpp"
#include "metacoop/partners.hpp"
#include "metacoop/policy.hpp"

namespace metacoop {

// Lockstep batch engine: many episodes advance one timestep at a time so the
// recurrent forward runs once per step over a whole batch. Kernels are
// row-independent, so each lane's history is bit-identical to the same
// episode run alone through the generic single-episode runner.

enum class RecordLevel { Rewards, Full };

struct LaneTask {
  std::vector<std::pair<PartnerSpec, int>> schedule;  // scripted side's segments
  bool net_is_p0 = true;
  std::uint64_t episode_index = 0;  // rng stream key
};

struct LaneResult {
  int partner_id = -1;  // first scheduled partner; -1 for net-vs-net
  bool net_is_p0 = true;
  std::uint64_t episode_index = 0;
  std::vector<float> reward;  // one entry per step

  // RecordLevel::Full only — everything a PPO replay needs.
  std::vector<float> features;       // horizon x input_dim, row-major
  std::vector<std::uint8_t> mask;    // horizon x 5
  std::vector<int> action;           // net's own actions
  std::vector<float> logp;           // log-prob of the sampled action
  std::vector<float> value;          // critic output

  double total_return() const {
    double sum = 0.0;
    for (float r : reward) sum += r;
    return sum;
  }
};

std::vector<LaneResult> run_net_vs_scripted(const GruNetwork<float>& net, GameId game,
                                            ArchVariant arch, const std::vector<LaneTask>& lanes,
                                            int horizon, std::uint64_t seed, RecordLevel level,
                                            bool greedy = false);

struct NetSide {
  const GruNetwork<float>* net = nullptr;
  ArchVariant arch = ArchVariant::AR_RNN;
};

// side_p0's net always occupies env seat 0 (DSL speaker), side_p1 seat 1
// (DSL listener). The two sides may be the same network object; hidden
// states stay independent.
std::pair<std::vector<LaneResult>, std::vector<LaneResult>> run_net_vs_net(
    NetSide side_p0, NetSide side_p1, GameId game, int n_lanes, int horizon, std::uint64_t seed,
    std::uint64_t first_episode_index, RecordLevel level, bool greedy = false);

}  // namespace metacoop
