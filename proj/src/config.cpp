#include "metacoop/config.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "metacoop/check.hpp"
#include "metacoop/version.hpp"

namespace metacoop {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::int64_t parse_i64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  std::int64_t out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  check(pos == v.size() && !v.empty(), "config: bad integer for key '" + key + "': " + v);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const std::int64_t x = parse_i64(key, v);
  check(x >= 0, "config: key '" + key + "' must be nonnegative");
  return static_cast<std::uint64_t>(x);
}

int parse_int(const std::string& key, const std::string& v) {
  const std::int64_t x = parse_i64(key, v);
  check(x >= INT32_MIN && x <= INT32_MAX, "config: key '" + key + "' out of int range");
  return static_cast<int>(x);
}

double parse_f64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  check(pos == v.size() && !v.empty(), "config: bad number for key '" + key + "': " + v);
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    check(eq != std::string::npos,
          "config: line " + std::to_string(lineno) + " is not 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    check(!key.empty(), "config: empty key on line " + std::to_string(lineno));
    check(!kv.count(key), "config: duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  std::vector<std::string> unknown;
  for (const auto& [key, v] : kv) {
    if (key == "experiment") cfg.experiment = v;
    else if (key == "method") cfg.method = v;
    else if (key == "game") cfg.game = game_from_string(v);
    else if (key == "arch") cfg.arch = arch_from_string(v);
    else if (key == "budget") cfg.budget = parse_i64(key, v);
    else if (key == "horizon") cfg.horizon = parse_int(key, v);
    else if (key == "gamma") cfg.gamma = parse_f64(key, v);
    else if (key == "lambda") cfg.lambda = parse_f64(key, v);
    else if (key == "lr") cfg.lr = parse_f64(key, v);
    else if (key == "clip_eps") cfg.clip_eps = parse_f64(key, v);
    else if (key == "c_value") cfg.c_value = parse_f64(key, v);
    else if (key == "c_entropy") cfg.c_entropy = parse_f64(key, v);
    else if (key == "max_grad_norm") cfg.max_grad_norm = parse_f64(key, v);
    else if (key == "episodes_per_batch") cfg.episodes_per_batch = parse_int(key, v);
    else if (key == "epochs") cfg.epochs = parse_int(key, v);
    else if (key == "minibatch_episodes") cfg.minibatch_episodes = parse_int(key, v);
    else if (key == "checkpoint_every_iters") cfg.checkpoint_every_iters = parse_int(key, v);
    else if (key == "split_kind") cfg.split_kind = v;
    else if (key == "split_seed") cfg.split_seed = parse_u64(key, v);
    else if (key == "quantity_k") cfg.quantity_k = parse_int(key, v);
    else if (key == "seeds") {
      cfg.seeds.clear();
      for (const std::string& s : split_list(v)) cfg.seeds.push_back(parse_u64(key, s));
    } else if (key == "sweep_seeds") {
      cfg.sweep_seeds.clear();
      for (const std::string& s : split_list(v)) cfg.sweep_seeds.push_back(parse_u64(key, s));
    } else if (key == "sweep_ks") {
      cfg.sweep_ks.clear();
      for (const std::string& s : split_list(v)) cfg.sweep_ks.push_back(parse_int(key, s));
    } else if (key == "eval_episodes") cfg.eval_episodes = parse_int(key, v);
    else if (key == "eval_seed") cfg.eval_seed = parse_u64(key, v);
    else if (key == "long_horizon") cfg.long_horizon = parse_int(key, v);
    else if (key == "switch_schedule") {
      cfg.switch_schedule.clear();
      for (const std::string& s : split_list(v)) cfg.switch_schedule.push_back(parse_int(key, s));
    } else if (key == "episodes_per_cell") cfg.episodes_per_cell = parse_int(key, v);
    else if (key == "out") cfg.out = v;
    else if (key == "code_version") cfg.code_version = v;
    else unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const std::string& k : unknown) msg += " " + k;
    raise(msg);
  }
  check(cfg.method == "mrl" || cfg.method == "il",
        "config: method must be 'mrl' or 'il', got '" + cfg.method + "'");
  check(cfg.split_kind == "random" || cfg.split_kind == "skewed",
        "config: split_kind must be 'random' or 'skewed', got '" + cfg.split_kind + "'");
  check(!cfg.seeds.empty(), "config: empty seed list");
  check(!cfg.sweep_seeds.empty(), "config: empty sweep seed list");
  check(cfg.eval_episodes >= 1, "config: eval_episodes must be >= 1");
  check(cfg.episodes_per_cell >= 1, "config: episodes_per_cell must be >= 1");
  check(cfg.long_horizon > cfg.horizon, "config: long_horizon must exceed horizon");
  for (int d : cfg.switch_schedule) check(d >= 1, "config: switch_schedule entries must be >= 1");
  return cfg;
}

std::string config_to_kv(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["experiment"] = cfg.experiment;
  kv["method"] = cfg.method;
  kv["game"] = to_string(cfg.game);
  kv["arch"] = to_string(cfg.arch);
  kv["budget"] = std::to_string(cfg.budget);
  kv["horizon"] = std::to_string(cfg.horizon);
  kv["gamma"] = fmt_g(cfg.gamma);
  kv["lambda"] = fmt_g(cfg.lambda);
  kv["lr"] = fmt_g(cfg.lr);
  kv["clip_eps"] = fmt_g(cfg.clip_eps);
  kv["c_value"] = fmt_g(cfg.c_value);
  kv["c_entropy"] = fmt_g(cfg.c_entropy);
  kv["max_grad_norm"] = fmt_g(cfg.max_grad_norm);
  kv["episodes_per_batch"] = std::to_string(cfg.episodes_per_batch);
  kv["epochs"] = std::to_string(cfg.epochs);
  kv["minibatch_episodes"] = std::to_string(cfg.minibatch_episodes);
  kv["checkpoint_every_iters"] = std::to_string(cfg.checkpoint_every_iters);
  kv["split_kind"] = cfg.split_kind;
  kv["split_seed"] = std::to_string(cfg.split_seed);
  kv["quantity_k"] = std::to_string(cfg.quantity_k);
  kv["seeds"] = join(cfg.seeds);
  kv["sweep_seeds"] = join(cfg.sweep_seeds);
  kv["sweep_ks"] = join(cfg.sweep_ks);
  kv["eval_episodes"] = std::to_string(cfg.eval_episodes);
  kv["eval_seed"] = std::to_string(cfg.eval_seed);
  kv["long_horizon"] = std::to_string(cfg.long_horizon);
  kv["switch_schedule"] = join(cfg.switch_schedule);
  kv["episodes_per_cell"] = std::to_string(cfg.episodes_per_cell);
  kv["out"] = cfg.out;
  kv["code_version"] = kCodeVersion;
  std::string out;
  for (const auto& [key, v] : kv) out += key + " = " + v + "\n";
  return out;
}

PartnerSplit make_split(const ExperimentConfig& cfg) {
  PartnerSplit split;
  if (cfg.split_kind == "skewed") {
    split = cfg.game == GameId::LC ? split_skewed_lc() : split_skewed_dsl();
  } else {
    split = split_random(cfg.game, 60, cfg.split_seed);
  }
  if (cfg.quantity_k > 0) split = subset_quantity(split, cfg.quantity_k, cfg.split_seed);
  return split;
}

TrainConfig to_train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig t;
  t.game = cfg.game;
  t.arch = cfg.arch;
  t.split = make_split(cfg);
  t.horizon = cfg.horizon;
  t.total_timesteps = cfg.budget;
  t.gamma = cfg.gamma;
  t.lambda = cfg.lambda;
  t.lr = cfg.lr;
  t.clip_eps = cfg.clip_eps;
  t.c_value = cfg.c_value;
  t.c_entropy = cfg.c_entropy;
  t.max_grad_norm = cfg.max_grad_norm;
  t.episodes_per_batch = cfg.episodes_per_batch;
  t.epochs = cfg.epochs;
  t.minibatch_episodes = cfg.minibatch_episodes;
  t.seed = seed;
  t.checkpoint_every_iters = cfg.checkpoint_every_iters;
  return t;
}

SwitchSchedule default_switch_schedule(GameId game) {
  if (game == GameId::LC) return SwitchSchedule{std::vector<int>(10, 50)};
  return SwitchSchedule{{50, 200, 50, 200}};
}

}  // namespace metacoop
