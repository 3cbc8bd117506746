#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "metacoop/config.hpp"
#include "metacoop/episode.hpp"
#include "metacoop/eval.hpp"
#include "metacoop/io.hpp"
#include "metacoop/trainer.hpp"

namespace {

using namespace metacoop;

double mean_of(const std::vector<double>& xs, double* out_std = nullptr) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (out_std) {
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    *out_std = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return mean;
}

std::string out_root_default() {
  const char* env = std::getenv("METACOOP_OUT");
  return env && *env ? std::string(env) : std::string("runs");
}

std::string resolve_run_dir(const ExperimentConfig& cfg, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg.out.empty()) return cfg.out;
  return out_root_default() + "/" + cfg.experiment;
}

// Config file first, then --set overrides, then explicit flags on top.
ExperimentConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& sets) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty()) kv = parse_kv_text(io::read_file(config_path));
  for (const std::string& s : sets) {
    const auto one = parse_kv_text(s);
    check(one.size() == 1, "--set expects one key=value, got: " + s);
    kv[one.begin()->first] = one.begin()->second;
  }
  return config_from_kv(kv);
}

std::string ckpt_path(const std::string& run_dir, std::uint64_t seed, const char* suffix = "") {
  return run_dir + "/checkpoints/seed_" + std::to_string(seed) + suffix + ".json";
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  io::write_file_atomic(path, checkpoint_to_json(ckpt).dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  check(io::file_exists(path), "missing checkpoint: " + path);
  return checkpoint_from_json(nlohmann::json::parse(io::read_file(path)));
}

void progress(const std::string& tag, std::uint64_t seed, std::int64_t iter, std::int64_t iters,
              const std::vector<CurveRow>& curve) {
  std::printf("[%s] seed %llu iter %lld/%lld mean_return=%.3f\n", tag.c_str(),
              static_cast<unsigned long long>(seed), static_cast<long long>(iter),
              static_cast<long long>(iters), curve.empty() ? 0.0 : curve.back().mean_return);
  std::fflush(stdout);
}

bool run_is_complete(const ExperimentConfig& cfg, const std::string& run_dir) {
  if (!io::file_exists(run_dir + "/config.resolved")) return false;
  for (std::uint64_t seed : cfg.seeds) {
    if (cfg.method == "il") {
      if (!io::file_exists(ckpt_path(run_dir, seed, "_p0")) ||
          !io::file_exists(ckpt_path(run_dir, seed, "_p1"))) {
        return false;
      }
    } else if (!io::file_exists(ckpt_path(run_dir, seed))) {
      return false;
    }
  }
  return true;
}

void run_training(const ExperimentConfig& cfg, const std::string& run_dir) {
  ExperimentConfig resolved = cfg;
  resolved.out = run_dir;
  io::write_file_atomic(run_dir + "/config.resolved", config_to_kv(resolved));
  for (std::uint64_t seed : cfg.seeds) {
    const TrainConfig tc = to_train_config(cfg, seed);
    const std::string curve_path = run_dir + "/curves/seed_" + std::to_string(seed) + ".csv";
    if (cfg.method == "il") {
      const auto sink = [&](const Checkpoint& p0, const Checkpoint& p1, std::int64_t iter,
                            const std::vector<CurveRow>& curve) {
        write_checkpoint(ckpt_path(run_dir, seed, "_p0_partial"), p0);
        write_checkpoint(ckpt_path(run_dir, seed, "_p1_partial"), p1);
        io::write_file_atomic(curve_path, io::training_curve_csv(curve));
        progress("train:il", seed, iter, tc.iterations(), curve);
      };
      const IlTrainResult r = train_il(tc, sink);
      write_checkpoint(ckpt_path(run_dir, seed, "_p0"), r.net_p0);
      write_checkpoint(ckpt_path(run_dir, seed, "_p1"), r.net_p1);
      io::write_file_atomic(curve_path, io::training_curve_csv(r.curve));
      progress("train:il", seed, tc.iterations(), tc.iterations(), r.curve);
    } else {
      const auto sink = [&](const Checkpoint& ckpt, std::int64_t iter,
                            const std::vector<CurveRow>& curve) {
        write_checkpoint(ckpt_path(run_dir, seed, "_partial"), ckpt);
        io::write_file_atomic(curve_path, io::training_curve_csv(curve));
        progress("train:mrl", seed, iter, tc.iterations(), curve);
      };
      const TrainResult r = train_meta(tc, sink);
      write_checkpoint(ckpt_path(run_dir, seed), r.checkpoint);
      io::write_file_atomic(curve_path, io::training_curve_csv(r.curve));
      progress("train:mrl", seed, tc.iterations(), tc.iterations(), r.curve);
    }
  }
}

struct Run {
  ExperimentConfig cfg;
  std::string dir;
};

Run open_run(const std::string& dir) {
  const std::string path = dir + "/config.resolved";
  check(io::file_exists(path), "not a run directory (no config.resolved): " + dir);
  return Run{config_from_kv(parse_kv_text(io::read_file(path))), dir};
}

std::vector<Checkpoint> load_mrl_checkpoints(const Run& run,
                                             const std::vector<std::uint64_t>& seeds) {
  check(run.cfg.method == "mrl", "run is not a meta-trained run: " + run.dir);
  std::vector<Checkpoint> out;
  for (std::uint64_t seed : seeds) out.push_back(load_checkpoint(ckpt_path(run.dir, seed)));
  return out;
}

std::vector<IlPair> load_il_pairs(const Run& run, const std::vector<std::uint64_t>& seeds) {
  check(run.cfg.method == "il", "run is not an independent-learner run: " + run.dir);
  std::vector<IlPair> out;
  for (std::uint64_t seed : seeds) {
    IlPair pair;
    pair.p0 = load_checkpoint(ckpt_path(run.dir, seed, "_p0"));
    pair.p1 = load_checkpoint(ckpt_path(run.dir, seed, "_p1"));
    pair.label = "seed_" + std::to_string(seed);
    out.push_back(std::move(pair));
  }
  return out;
}

// ---- eval ----

struct EvalAgg {
  std::vector<double> per_seed;
  double mean = 0.0;
  double std_ = 0.0;
  std::vector<double> curve;  // averaged across seeds
  std::vector<std::pair<int, double>> per_partner;
};

EvalAgg aggregate(const std::vector<EvalReport>& reports) {
  EvalAgg agg;
  std::map<int, double> partner_sum;
  for (const EvalReport& r : reports) {
    agg.per_seed.push_back(r.mean_score);
    if (agg.curve.empty()) agg.curve.assign(r.curve.size(), 0.0);
    check(agg.curve.size() == r.curve.size(), "aggregate: curve length mismatch across seeds");
    for (std::size_t t = 0; t < r.curve.size(); ++t) agg.curve[t] += r.curve[t];
    for (const auto& [id, m] : r.per_partner) partner_sum[id] += m;
  }
  for (double& c : agg.curve) c /= static_cast<double>(reports.size());
  for (const auto& [id, sum] : partner_sum) {
    agg.per_partner.emplace_back(id, sum / static_cast<double>(reports.size()));
  }
  agg.mean = mean_of(agg.per_seed, &agg.std_);
  return agg;
}

nlohmann::json eval_json(const std::string& experiment, const std::string& protocol,
                         const std::vector<std::uint64_t>& seeds, const EvalAgg& agg,
                         int episodes) {
  nlohmann::json per_seed = nlohmann::json::array();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    per_seed.push_back({{"seed", seeds[i]}, {"mean", agg.per_seed[i]}});
  }
  nlohmann::json per_partner = nlohmann::json::array();
  for (const auto& [id, m] : agg.per_partner) {
    per_partner.push_back({{"partner_id", id}, {"mean", m}});
  }
  return {{"experiment", experiment}, {"protocol", protocol}, {"episodes", episodes},
          {"mean", agg.mean},         {"std", agg.std_},      {"per_seed", per_seed},
          {"per_partner", per_partner}};
}

void cmd_eval(const std::string& run_dir, const std::string& protocol, int episodes_override,
              std::int64_t eval_seed_override, const std::vector<std::uint64_t>& seeds_override,
              const std::string& schedule_text) {
  const Run run = open_run(run_dir);
  ExperimentConfig cfg = run.cfg;
  if (episodes_override > 0) cfg.eval_episodes = episodes_override;
  if (eval_seed_override >= 0) cfg.eval_seed = static_cast<std::uint64_t>(eval_seed_override);
  const std::vector<std::uint64_t> seeds = seeds_override.empty() ? cfg.seeds : seeds_override;
  const PartnerSplit split = make_split(cfg);
  const std::vector<Checkpoint> ckpts = load_mrl_checkpoints(run, seeds);

  std::vector<EvalReport> reports;
  if (protocol == "unseen" || protocol == "curve") {
    for (const Checkpoint& c : ckpts) {
      reports.push_back(eval_unseen(c, split, {cfg.eval_episodes, cfg.horizon, cfg.eval_seed, -1}));
    }
  } else if (protocol == "long") {
    for (const Checkpoint& c : ckpts) {
      reports.push_back(
          eval_long_horizon(c, split, {cfg.eval_episodes, cfg.long_horizon, cfg.eval_seed, -1}));
    }
  } else if (protocol == "switch") {
    SwitchSchedule schedule = default_switch_schedule(cfg.game);
    if (!schedule_text.empty()) {
      schedule.durations.clear();
      std::stringstream ss(schedule_text);
      std::string item;
      while (std::getline(ss, item, ',')) schedule.durations.push_back(std::stoi(item));
      cfg.switch_schedule = schedule.durations;
    } else if (!cfg.switch_schedule.empty()) {
      schedule.durations = cfg.switch_schedule;
    }
    for (const Checkpoint& c : ckpts) {
      reports.push_back(eval_switching(c, split, schedule, cfg.eval_episodes, cfg.eval_seed));
    }
  } else {
    raise("unknown eval protocol: " + protocol + " (expected unseen|curve|long|switch)");
  }

  const EvalAgg agg = aggregate(reports);
  nlohmann::json j = eval_json(cfg.experiment, protocol, seeds, agg, cfg.eval_episodes);
  if (protocol == "switch") {
    SwitchSchedule schedule = default_switch_schedule(cfg.game);
    if (!cfg.switch_schedule.empty()) schedule.durations = cfg.switch_schedule;
    nlohmann::json segs = nlohmann::json::array();
    int t0 = 0;
    for (int d : schedule.durations) {
      double sum = 0.0;
      for (int t = t0; t < t0 + d; ++t) sum += agg.curve[t];
      segs.push_back({{"start", t0}, {"duration", d}, {"mean_chance", sum / d}});
      t0 += d;
    }
    j["segments"] = segs;
  }
  io::write_file_atomic(run.dir + "/reports/" + protocol + ".json", j.dump(2) + "\n");
  io::write_file_atomic(run.dir + "/curves/" + protocol + "_curve.csv",
                        io::chance_curve_csv(agg.curve));
  io::write_file_atomic(run.dir + "/figures/" + protocol + ".svg",
                        io::svg_curves({{protocol, agg.curve}}, "t", "reward chance", 1.0));
  std::printf("[eval] %s %s mean=%.3f std=%.3f -> %s/reports/%s.json\n", cfg.experiment.c_str(),
              protocol.c_str(), agg.mean, agg.std_, run.dir.c_str(), protocol.c_str());
}

// ---- crossplay ----

void write_matrix_artifacts(const std::string& out_dir, const std::string& tag,
                            const std::string& experiment, const CrossPlayMatrix& m,
                            double vmax) {
  io::write_file_atomic(out_dir + "/reports/" + tag + ".csv", io::matrix_csv(m));
  io::write_file_atomic(out_dir + "/reports/" + tag + ".json",
                        io::matrix_summary_json(experiment, m).dump(2) + "\n");
  io::write_file_atomic(out_dir + "/figures/" + tag + ".svg", io::svg_heatmap(m, vmax));
  const MatrixStats stats = matrix_stats(m);
  std::printf("[crossplay] %s diag=%.2f±%.2f offdiag=%.2f±%.2f grid=%.2f±%.2f\n", tag.c_str(),
              stats.diag_mean, stats.diag_std, stats.offdiag_mean, stats.offdiag_std,
              stats.grid_mean, stats.grid_std);
}

void cmd_crossplay(const std::vector<std::string>& run_dirs, const std::string& mode,
                   int episodes_per_cell, std::int64_t eval_seed_override,
                   const std::string& cli_out) {
  check(mode == "self" || mode == "adhoc", "crossplay mode must be self or adhoc");
  std::vector<Run> runs;
  for (const std::string& d : run_dirs) runs.push_back(open_run(d));
  check(!runs.empty(), "crossplay: need at least one run directory");
  for (const Run& r : runs) {
    check(r.cfg.game == runs.front().cfg.game, "crossplay: run directories mix games");
  }
  const ExperimentConfig& base = runs.front().cfg;
  const int epc = episodes_per_cell > 0 ? episodes_per_cell : base.episodes_per_cell;
  const std::uint64_t eval_seed =
      eval_seed_override >= 0 ? static_cast<std::uint64_t>(eval_seed_override) : base.eval_seed;
  const std::string out_dir = cli_out.empty() ? runs.front().dir : cli_out;
  const double vmax = base.horizon;

  if (mode == "self") {
    check(runs.size() == 1, "crossplay self mode takes exactly one run directory");
    const Run& run = runs[0];
    if (run.cfg.method == "il") {
      const CrossPlayMatrix m =
          crossplay_self_il(load_il_pairs(run, run.cfg.seeds), epc, eval_seed);
      write_matrix_artifacts(out_dir, "crossplay_self_il", run.cfg.experiment, m, vmax);
    } else {
      const CrossPlayMatrix m =
          crossplay_self_mrl(load_mrl_checkpoints(run, run.cfg.seeds), epc, eval_seed);
      write_matrix_artifacts(out_dir, "crossplay_self_mrl", run.cfg.experiment, m, vmax);
    }
  } else {
    check(runs.size() == 2, "crossplay adhoc mode takes exactly two run directories (mrl, il)");
    const Run* mrl_run = nullptr;
    const Run* il_run = nullptr;
    for (const Run& r : runs) (r.cfg.method == "il" ? il_run : mrl_run) = &r;
    check(mrl_run && il_run && mrl_run->cfg.method == "mrl",
          "crossplay adhoc needs one mrl run and one il run");
    const CrossPlayMatrix m =
        adhoc_mrl_il(load_mrl_checkpoints(*mrl_run, mrl_run->cfg.seeds),
                     load_il_pairs(*il_run, il_run->cfg.seeds), epc, eval_seed);
    write_matrix_artifacts(out_dir, "crossplay_adhoc", mrl_run->cfg.experiment, m, vmax);
  }
}

// ---- sweep ----

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::string out = "label,mean,std";
  if (!cells.empty()) {
    for (std::size_t i = 0; i < cells.front().per_seed.size(); ++i) {
      out += ",seed" + std::to_string(i);
    }
  }
  out += "\n";
  for (const SweepCell& c : cells) {
    out += c.label + "," + io::fmt(c.mean, 3) + "," + io::fmt(c.stddev, 3);
    for (double v : c.per_seed) out += "," + io::fmt(v, 3);
    out += "\n";
  }
  return out;
}

void run_sweep(const ExperimentConfig& cfg, const std::string& axis, const std::string& out_dir) {
  ExperimentConfig base_cfg = cfg;
  base_cfg.quantity_k = 0;
  const TrainConfig base = to_train_config(base_cfg, 0);
  std::vector<SweepCell> cells;
  if (axis == "quantity") {
    cells = sweep_quantity(base, cfg.sweep_ks, cfg.sweep_seeds, cfg.eval_episodes, cfg.eval_seed);
  } else if (axis == "diversity") {
    cells = sweep_diversity(base, cfg.sweep_seeds, cfg.eval_episodes, cfg.eval_seed);
  } else {
    raise("unknown sweep axis: " + axis + " (expected quantity|diversity)");
  }
  ExperimentConfig resolved = cfg;
  resolved.out = out_dir;
  io::write_file_atomic(out_dir + "/config.resolved", config_to_kv(resolved));
  io::write_file_atomic(out_dir + "/reports/sweep_" + axis + ".json",
                        io::sweep_summary_json(cfg.experiment + "_sweep_" + axis, cells).dump(2) +
                            "\n");
  io::write_file_atomic(out_dir + "/reports/sweep_" + axis + ".csv", sweep_csv(cells));
  for (const SweepCell& c : cells) {
    std::printf("[sweep:%s] %s mean=%.3f std=%.3f\n", axis.c_str(), c.label.c_str(), c.mean,
                c.stddev);
  }
}

// ---- export ----

void cmd_export(const std::string& run_dir, std::int64_t seed_flag, int partner_id,
                const std::string& partner_role, int episodes, std::int64_t eval_seed_override,
                const std::string& cli_out) {
  const Run run = open_run(run_dir);
  const std::uint64_t seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                                            : run.cfg.seeds.front();
  const Checkpoint ckpt = load_checkpoint(ckpt_path(run.dir, seed));
  const std::vector<PartnerSpec> pool = enumerate_partners(ckpt.game);
  check(partner_id >= 0 && partner_id < static_cast<int>(pool.size()),
        "export: partner id out of range");
  PartnerSpec partner = pool[partner_id];
  int net_seat = 0;
  if (ckpt.game == GameId::DSL) {
    check(partner_role == "speaker" || partner_role == "listener",
          "export: --partner-role must be speaker or listener for dsl");
    partner.role = partner_role == "speaker" ? PartnerRole::Speaker : PartnerRole::Listener;
    net_seat = partner.role == PartnerRole::Speaker ? 1 : 0;
  }
  const std::uint64_t eval_seed =
      eval_seed_override >= 0 ? static_cast<std::uint64_t>(eval_seed_override) : run.cfg.eval_seed;

  GruNetwork<float> net(&ckpt.params);
  NetAgent net_agent(&net, ckpt.game, ckpt.arch, net_seat);
  ScriptedAgent scripted(partner);
  Agent& p0 = net_seat == 0 ? static_cast<Agent&>(net_agent) : scripted;
  Agent& p1 = net_seat == 0 ? static_cast<Agent&>(scripted) : net_agent;
  std::unique_ptr<TwoPlayerGame> game = make_game(ckpt.game);

  std::string text;
  for (int e = 0; e < episodes; ++e) {
    text += episode_to_jsonl(run_episode(*game, p0, p1, run.cfg.horizon, eval_seed, e));
  }
  const std::string out_path =
      cli_out.empty() ? run.dir + "/reports/episodes_seed" + std::to_string(seed) + "_partner" +
                            std::to_string(partner_id) + ".jsonl"
                      : cli_out;
  io::write_file_atomic(out_path, text);
  std::printf("[export] %d episode(s) -> %s\n", episodes, out_path.c_str());
}

// ---- repro ----

ExperimentConfig repro_base(GameId game, const std::vector<std::string>& sets) {
  ExperimentConfig base;
  base.game = game;
  base.experiment = to_string(game);
  base.budget = game == GameId::LC ? 9'000'000 : 30'000'000;
  std::map<std::string, std::string> kv = parse_kv_text(config_to_kv(base));
  for (const std::string& s : sets) {
    const auto one = parse_kv_text(s);
    check(one.size() == 1, "--set expects one key=value, got: " + s);
    kv[one.begin()->first] = one.begin()->second;
  }
  ExperimentConfig cfg = config_from_kv(kv);
  cfg.game = game;  // --game wins over any config text
  return cfg;
}

ExperimentConfig derive_run(const ExperimentConfig& base, const std::string& out_root,
                            ArchVariant arch, const std::string& method) {
  ExperimentConfig cfg = base;
  cfg.arch = arch;
  cfg.method = method;
  cfg.experiment = to_string(base.game) + "_" + method + "_" + to_string(arch);
  cfg.out = out_root + "/" + cfg.experiment;
  return cfg;
}

std::string ensure_trained(const ExperimentConfig& cfg, bool retrain) {
  const std::string run_dir = cfg.out;
  if (!retrain && run_is_complete(cfg, run_dir)) {
    std::printf("[repro] reusing %s\n", run_dir.c_str());
    return run_dir;
  }
  std::printf("[repro] training %s (budget %lld x %zu seeds)\n", cfg.experiment.c_str(),
              static_cast<long long>(cfg.budget), cfg.seeds.size());
  std::fflush(stdout);
  run_training(cfg, run_dir);
  return run_dir;
}

void write_provenance(const ExperimentConfig& base, const std::string& dir) {
  ExperimentConfig resolved = base;
  resolved.out = dir;
  io::write_file_atomic(dir + "/config.resolved", config_to_kv(resolved));
}

void cmd_repro(const std::string& target, GameId game, const std::vector<std::string>& sets,
               const std::string& out_root_flag, bool retrain) {
  const std::string out_root = out_root_flag.empty() ? out_root_default() : out_root_flag;
  const ExperimentConfig base = repro_base(game, sets);
  const std::string game_tag = to_string(game);
  const std::vector<ArchVariant> all_archs = {ArchVariant::RNN, ArchVariant::A_RNN,
                                              ArchVariant::R_RNN, ArchVariant::AR_RNN};

  if (target == "architectures" || target == "adaptation") {
    std::vector<std::pair<std::string, std::vector<double>>> series;
    std::vector<SweepCell> cells;
    for (ArchVariant arch : all_archs) {
      const ExperimentConfig cfg = derive_run(base, out_root, arch, "mrl");
      ensure_trained(cfg, retrain);
      const Run run = open_run(cfg.out);
      const PartnerSplit split = make_split(run.cfg);
      std::vector<EvalReport> reports;
      for (const Checkpoint& c : load_mrl_checkpoints(run, run.cfg.seeds)) {
        reports.push_back(
            eval_unseen(c, split, {cfg.eval_episodes, cfg.horizon, cfg.eval_seed, -1}));
      }
      const EvalAgg agg = aggregate(reports);
      SweepCell cell;
      cell.label = to_string(arch);
      cell.seeds = run.cfg.seeds;
      cell.per_seed = agg.per_seed;
      cell.mean = agg.mean;
      cell.stddev = agg.std_;
      cells.push_back(cell);
      series.emplace_back(to_string(arch), agg.curve);
    }
    const std::string dir = out_root + "/" + game_tag + "_" + target;
    write_provenance(base, dir);
    if (target == "architectures") {
      io::write_file_atomic(dir + "/reports/architectures.json",
                            io::sweep_summary_json(game_tag + "_architectures", cells).dump(2) +
                                "\n");
      io::write_file_atomic(dir + "/reports/architectures.csv", sweep_csv(cells));
      for (const SweepCell& c : cells) {
        std::printf("[architectures] %s unseen=%.2f±%.2f\n", c.label.c_str(), c.mean, c.stddev);
      }
    } else {
      for (const auto& [label, curve] : series) {
        io::write_file_atomic(dir + "/curves/" + label + ".csv", io::chance_curve_csv(curve));
      }
      io::write_file_atomic(dir + "/figures/adaptation.svg",
                            io::svg_curves(series, "t", "reward chance", 1.0));
      io::write_file_atomic(dir + "/reports/adaptation.json",
                            io::sweep_summary_json(game_tag + "_adaptation", cells).dump(2) +
                                "\n");
      std::printf("[adaptation] curves -> %s\n", dir.c_str());
    }
  } else if (target == "long-horizon" || target == "switching") {
    const ExperimentConfig cfg = derive_run(base, out_root, base.arch, "mrl");
    ensure_trained(cfg, retrain);
    cmd_eval(cfg.out, target == "long-horizon" ? "long" : "switch", 0, -1, {}, "");
  } else if (target == "crossplay" || target == "pairing-summary") {
    const ExperimentConfig mrl_cfg = derive_run(base, out_root, base.arch, "mrl");
    ExperimentConfig il_cfg = derive_run(base, out_root, base.arch, "il");
    ensure_trained(mrl_cfg, retrain);
    ensure_trained(il_cfg, retrain);
    const Run mrl_run = open_run(mrl_cfg.out);
    const Run il_run = open_run(il_cfg.out);
    const std::vector<Checkpoint> mrl_ckpts = load_mrl_checkpoints(mrl_run, mrl_run.cfg.seeds);
    const std::vector<IlPair> il_pairs = load_il_pairs(il_run, il_run.cfg.seeds);
    const int epc = base.episodes_per_cell;
    const CrossPlayMatrix m_mrl = crossplay_self_mrl(mrl_ckpts, epc, base.eval_seed);
    const CrossPlayMatrix m_il = crossplay_self_il(il_pairs, epc, base.eval_seed);
    const std::string dir = out_root + "/" + game_tag + "_" + target;
    write_provenance(base, dir);
    write_matrix_artifacts(dir, "crossplay_self_mrl", game_tag, m_mrl, base.horizon);
    write_matrix_artifacts(dir, "crossplay_self_il", game_tag, m_il, base.horizon);
    if (target == "pairing-summary") {
      const CrossPlayMatrix m_adhoc = adhoc_mrl_il(mrl_ckpts, il_pairs, epc, base.eval_seed);
      write_matrix_artifacts(dir, "crossplay_adhoc", game_tag, m_adhoc, base.horizon);
      const MatrixStats s_mrl = matrix_stats(m_mrl);
      const MatrixStats s_il = matrix_stats(m_il);
      const MatrixStats s_adhoc = matrix_stats(m_adhoc);
      std::vector<SweepCell> rows;
      auto add_row = [&rows](const std::string& label, double mean, double std_) {
        SweepCell c;
        c.label = label;
        c.mean = mean;
        c.stddev = std_;
        rows.push_back(c);
      };
      add_row("il_seen", s_il.diag_mean, s_il.diag_std);
      add_row("il_crossplay", s_il.offdiag_mean, s_il.offdiag_std);
      add_row("mrl_clone", s_mrl.diag_mean, s_mrl.diag_std);
      add_row("mrl_crossplay", s_mrl.offdiag_mean, s_mrl.offdiag_std);
      add_row("adhoc_mrl_il", s_adhoc.grid_mean, s_adhoc.grid_std);
      io::write_file_atomic(
          dir + "/reports/pairing_summary.json",
          io::sweep_summary_json(game_tag + "_pairing_summary", rows).dump(2) + "\n");
      io::write_file_atomic(dir + "/reports/pairing_summary.csv", sweep_csv(rows));
      for (const SweepCell& c : rows) {
        std::printf("[pairing] %s %.2f±%.2f\n", c.label.c_str(), c.mean, c.stddev);
      }
    }
  } else if (target == "sweep-quantity" || target == "sweep-diversity") {
    const std::string axis = target == "sweep-quantity" ? "quantity" : "diversity";
    ExperimentConfig cfg = base;
    cfg.experiment = game_tag + "_sweep_" + axis;
    const std::string dir = out_root + "/" + cfg.experiment;
    run_sweep(cfg, axis, dir);
  } else {
    raise("unknown repro target: " + target +
          " (expected architectures|adaptation|long-horizon|switching|crossplay|"
          "pairing-summary|sweep-quantity|sweep-diversity)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-based meta-RL workbench: scripted-partner populations, recurrent PPO, "
               "and the cooperation evaluation battery"};
  app.require_subcommand(1);

  // train
  std::string t_config, t_out;
  std::vector<std::string> t_sets;
  std::vector<std::uint64_t> t_seeds;
  bool t_force = false;
  auto* t = app.add_subcommand("train", "Train one experiment across its seed list");
  t->add_option("--config", t_config, "key = value config file");
  t->add_option("--set", t_sets, "override one config key (key=value), repeatable");
  t->add_option("--out", t_out, "run directory (default: $METACOOP_OUT or ./runs + name)");
  t->add_option("--seeds", t_seeds, "seed list override")->delimiter(',');
  t->add_flag("--force", t_force, "overwrite an existing run directory");
  t->callback([&] {
    ExperimentConfig cfg = load_config(t_config, t_sets);
    if (!t_seeds.empty()) cfg.seeds = t_seeds;
    const std::string run_dir = resolve_run_dir(cfg, t_out);
    check(t_force || !io::file_exists(run_dir + "/config.resolved"),
          "run directory already populated: " + run_dir + " (use --force)");
    run_training(cfg, run_dir);
  });

  // eval
  std::string e_run, e_protocol = "unseen", e_schedule;
  int e_episodes = 0;
  std::int64_t e_eval_seed = -1;
  std::vector<std::uint64_t> e_seeds;
  auto* e = app.add_subcommand("eval", "Evaluate a trained run");
  e->add_option("--run", e_run, "run directory")->required();
  e->add_option("--protocol", e_protocol, "unseen|curve|long|switch");
  e->add_option("--episodes", e_episodes, "evaluation episode count override");
  e->add_option("--eval-seed", e_eval_seed, "evaluation rng seed override");
  e->add_option("--seeds", e_seeds, "evaluate only these training seeds")->delimiter(',');
  e->add_option("--schedule", e_schedule, "switch protocol: comma-separated segment lengths");
  e->callback([&] { cmd_eval(e_run, e_protocol, e_episodes, e_eval_seed, e_seeds, e_schedule); });

  // crossplay
  std::vector<std::string> c_runs;
  std::string c_mode = "self", c_out;
  int c_epc = 0;
  std::int64_t c_eval_seed = -1;
  auto* c = app.add_subcommand("crossplay", "Pairwise matrices over trained checkpoints");
  c->add_option("--runs", c_runs, "run directories (1 for self, 2 for adhoc)")->required();
  c->add_option("--mode", c_mode, "self|adhoc");
  c->add_option("--episodes-per-cell", c_epc, "episodes per matrix cell");
  c->add_option("--eval-seed", c_eval_seed, "evaluation rng seed override");
  c->add_option("--out", c_out, "artifact directory (default: first run dir)");
  c->callback([&] { cmd_crossplay(c_runs, c_mode, c_epc, c_eval_seed, c_out); });

  // sweep
  std::string s_config, s_axis, s_out;
  std::vector<std::string> s_sets;
  bool s_force = false;
  auto* s = app.add_subcommand("sweep", "Train/eval across one population axis");
  s->add_option("--config", s_config, "key = value config file");
  s->add_option("--axis", s_axis, "quantity|diversity")->required();
  s->add_option("--set", s_sets, "override one config key (key=value), repeatable");
  s->add_option("--out", s_out, "artifact directory");
  s->add_flag("--force", s_force, "overwrite an existing artifact directory");
  s->callback([&] {
    ExperimentConfig cfg = load_config(s_config, s_sets);
    std::string dir = s_out;
    if (dir.empty()) {
      dir = cfg.out.empty() ? out_root_default() + "/" + cfg.experiment + "_sweep_" + s_axis
                            : cfg.out;
    }
    check(s_force || !io::file_exists(dir + "/config.resolved"),
          "artifact directory already populated: " + dir + " (use --force)");
    run_sweep(cfg, s_axis, dir);
  });

  // export
  std::string x_run, x_role = "speaker", x_out;
  std::int64_t x_seed = -1, x_eval_seed = -1;
  int x_partner = 0, x_episodes = 1;
  auto* x = app.add_subcommand("export", "Dump raw episode traces as JSONL");
  x->add_option("--run", x_run, "run directory")->required();
  x->add_option("--seed", x_seed, "training seed (default: first in config)");
  x->add_option("--partner", x_partner, "scripted partner id (0..119)");
  x->add_option("--partner-role", x_role, "dsl only: speaker|listener");
  x->add_option("--episodes", x_episodes, "episode count");
  x->add_option("--eval-seed", x_eval_seed, "rng seed override");
  x->add_option("--out", x_out, "output file (default: under run/reports)");
  x->callback(
      [&] { cmd_export(x_run, x_seed, x_partner, x_role, x_episodes, x_eval_seed, x_out); });

  // repro
  std::string r_target, r_game = "lc", r_out_root;
  std::vector<std::string> r_sets;
  bool r_retrain = false;
  auto* r = app.add_subcommand("repro", "Chain train + eval for one artifact");
  r->add_option("--target", r_target,
                "architectures|adaptation|long-horizon|switching|crossplay|pairing-summary|"
                "sweep-quantity|sweep-diversity")
      ->required();
  r->add_option("--game", r_game, "lc|dsl");
  r->add_option("--set", r_sets, "override one config key (key=value), repeatable");
  r->add_option("--out-root", r_out_root, "root for run + artifact directories");
  r->add_flag("--retrain", r_retrain, "retrain even if checkpoints exist");
  r->callback([&] { cmd_repro(r_target, game_from_string(r_game), r_sets, r_out_root, r_retrain); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  } catch (const metacoop::ContractError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
