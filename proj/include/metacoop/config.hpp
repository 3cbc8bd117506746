#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metacoop/eval.hpp"
#include "metacoop/ppo.hpp"

namespace metacoop {

// One experiment = one game/arch/method trained across a seed list plus the
// evaluation parameters used on the result. Flat key = value text on disk;
// unknown keys are an error (never silently ignored).
struct ExperimentConfig {
  std::string experiment = "run";
  std::string method = "mrl";  // "mrl" | "il"
  GameId game = GameId::LC;
  ArchVariant arch = ArchVariant::AR_RNN;

  std::int64_t budget = 9'000'000;
  int horizon = kDefaultHorizon;
  double gamma = 0.99;
  double lambda = 0.95;
  double lr = 1e-3;
  double clip_eps = 0.2;
  double c_value = 0.5;
  double c_entropy = 0.01;
  double max_grad_norm = 0.5;
  int episodes_per_batch = 64;
  int epochs = 4;
  int minibatch_episodes = 16;
  int checkpoint_every_iters = 0;  // 0 = final checkpoint only

  std::string split_kind = "random";  // "random" | "skewed"
  std::uint64_t split_seed = 0;
  int quantity_k = 0;  // 0 = full train side; else nested subset size

  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<std::uint64_t> sweep_seeds = {0, 1, 2};
  std::vector<int> sweep_ks = {15, 30, 45, 60};

  int eval_episodes = 18000;
  std::uint64_t eval_seed = 1000;
  int long_horizon = 500;
  std::vector<int> switch_schedule;  // empty = per-game default
  int episodes_per_cell = 300;

  std::string out;  // output directory; empty = derived from experiment name
  std::string code_version;  // stamped on write; informational on read
};

// "key = value" lines; '#' starts a comment; blank lines skipped; duplicate
// keys are an error.
std::map<std::string, std::string> parse_kv_text(const std::string& text);

// Applies kv pairs over defaults. Unknown keys raise one error listing all
// of them; malformed values name the key.
ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv);

// Every key, one per line, sorted; round-trips losslessly through
// parse_kv_text + config_from_kv. Stamps the current code version.
std::string config_to_kv(const ExperimentConfig& cfg);

// The split the config describes (random/skewed, then optional quantity
// subset of the train side).
PartnerSplit make_split(const ExperimentConfig& cfg);

// TrainConfig for one seed of this experiment.
TrainConfig to_train_config(const ExperimentConfig& cfg, std::uint64_t seed);

SwitchSchedule default_switch_schedule(GameId game);

}  // namespace metacoop
