#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "metacoop/episode.hpp"
#include "metacoop/eval.hpp"
#include "metacoop/params.hpp"
#include "metacoop/partners.hpp"
#include "metacoop/policy.hpp"
#include "metacoop/rng.hpp"

using namespace metacoop;

namespace {

Checkpoint make_checkpoint(GameId game, ArchVariant arch, std::uint64_t seed, bool zero = false) {
  Checkpoint ckpt;
  ckpt.game = game;
  ckpt.arch = arch;
  ckpt.seed = seed;
  const ParamLayout layout = make_policy_layout(arch_input_dim(game, arch));
  if (zero) {
    ckpt.params = ParamSet<float>(layout);
    ckpt.params.sync_transposes();
  } else {
    ckpt.params = init_params<float>(layout, seed);
  }
  return ckpt;
}

}  // namespace

TEST_CASE("eval: batch scoring equals a hand loop over single episodes") {
  Checkpoint ckpt = make_checkpoint(GameId::LC, ArchVariant::AR_RNN, 5);
  std::vector<int> ids = {3, 17, 42, 99, 118};
  EvalOptions opts;
  opts.episodes = 40;
  opts.eval_seed = 9;

  auto report = eval_against_partners(ckpt, ids, opts);
  CHECK(report.episodes == 40);
  REQUIRE(report.curve.size() == 50);

  // oracle: per-episode keyed draws + the generic single-episode runner
  GruNetwork<float> net(&ckpt.params);
  auto pool = enumerate_partners(GameId::LC);
  double sum = 0.0;
  std::vector<double> curve(50, 0.0);
  for (int e = 0; e < opts.episodes; ++e) {
    RngStream draw(opts.eval_seed, "eval_draw", static_cast<std::uint64_t>(e));
    const PartnerSpec& partner = pool[static_cast<size_t>(
        ids[static_cast<size_t>(draw.next_below(static_cast<std::uint64_t>(ids.size())))])];
    auto game = make_game(GameId::LC);
    NetAgent agent(&net, GameId::LC, ArchVariant::AR_RNN, 0);
    ScriptedAgent sc(partner);
    auto rec = run_episode(*game, agent, sc, 50, opts.eval_seed, static_cast<std::uint64_t>(e));
    sum += rec.total_return();
    for (int t = 0; t < 50; ++t) curve[static_cast<size_t>(t)] += rec.steps[static_cast<size_t>(t)].reward;
  }
  CHECK(report.mean_score == sum / opts.episodes);
  for (int t = 0; t < 50; ++t) {
    CHECK(report.curve[static_cast<size_t>(t)] == curve[static_cast<size_t>(t)] / opts.episodes);
  }
}

TEST_CASE("eval: a uniform-over-legal lever policy scores ten of fifty") {
  Checkpoint ckpt = make_checkpoint(GameId::LC, ArchVariant::RNN, 0, /*zero=*/true);
  std::vector<int> all_ids(120);
  for (int i = 0; i < 120; ++i) all_ids[static_cast<size_t>(i)] = i;
  EvalOptions opts;
  opts.episodes = 2000;
  opts.eval_seed = 3;
  auto report = eval_against_partners(ckpt, all_ids, opts);
  CHECK(std::abs(report.mean_score - 10.0) < 0.3);
  // flat chance curve: every block position matches at one in five
  for (double c : report.curve) {
    CHECK(c > 0.14);
    CHECK(c < 0.26);
  }
}

TEST_CASE("eval: uniform dsl policies score chance on either seat") {
  Checkpoint ckpt = make_checkpoint(GameId::DSL, ArchVariant::AR_RNN, 0, /*zero=*/true);
  std::vector<int> some_ids = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90};
  EvalOptions opts;
  opts.episodes = 1000;
  opts.eval_seed = 4;

  opts.dsl_net_player = 1;  // uniform listener vs scripted speakers
  auto as_listener = eval_against_partners(ckpt, some_ids, opts);
  CHECK(std::abs(as_listener.mean_score - 10.0) < 0.45);

  opts.dsl_net_player = 0;  // uniform speaker vs scripted listeners
  auto as_speaker = eval_against_partners(ckpt, some_ids, opts);
  CHECK(std::abs(as_speaker.mean_score - 10.0) < 0.45);

  opts.dsl_net_player = -1;  // per-episode seat draw
  auto mixed = eval_against_partners(ckpt, some_ids, opts);
  CHECK(std::abs(mixed.mean_score - 10.0) < 0.45);
}

TEST_CASE("eval: repeat runs are deterministic") {
  Checkpoint ckpt = make_checkpoint(GameId::LC, ArchVariant::A_RNN, 2);
  std::vector<int> ids = {1, 2, 3};
  EvalOptions opts;
  opts.episodes = 30;
  opts.eval_seed = 11;
  auto a = eval_against_partners(ckpt, ids, opts);
  auto b = eval_against_partners(ckpt, ids, opts);
  CHECK(a.mean_score == b.mean_score);
  CHECK(a.curve == b.curve);
  CHECK(a.per_partner == b.per_partner);
  opts.eval_seed = 12;
  auto c = eval_against_partners(ckpt, ids, opts);
  CHECK(a.mean_score != c.mean_score);
}

TEST_CASE("eval: unseen protocol polices the split") {
  Checkpoint ckpt = make_checkpoint(GameId::LC, ArchVariant::RNN, 1, /*zero=*/true);
  auto split = split_random(GameId::LC, 60, 0);
  EvalOptions opts;
  opts.episodes = 120;
  opts.eval_seed = 5;

  auto report = eval_unseen(ckpt, split, opts);
  std::set<int> test(split.test.begin(), split.test.end());
  CHECK(!report.per_partner.empty());
  for (const auto& [id, mean] : report.per_partner) {
    CHECK(test.count(id) == 1);
    CHECK(mean >= 0.0);
    CHECK(mean <= 50.0);
  }

  PartnerSplit overlapping = split;
  overlapping.test[0] = overlapping.train[0];
  CHECK_THROWS_AS(eval_unseen(ckpt, overlapping, opts), ContractError);

  PartnerSplit wrong_game = split;
  wrong_game.game_id = GameId::DSL;
  CHECK_THROWS_AS(eval_unseen(ckpt, wrong_game, opts), ContractError);

  PartnerSplit no_test = split;
  no_test.test.clear();
  CHECK_THROWS_AS(eval_unseen(ckpt, no_test, opts), ContractError);
}

TEST_CASE("eval: long horizon stretches the curve, guards the parameter") {
  Checkpoint ckpt = make_checkpoint(GameId::LC, ArchVariant::RNN, 1, /*zero=*/true);
  auto split = split_random(GameId::LC, 60, 0);
  EvalOptions opts;
  opts.episodes = 20;
  opts.horizon = 500;
  opts.eval_seed = 6;
  auto report = eval_long_horizon(ckpt, split, opts);
  CHECK(report.curve.size() == 500);
  CHECK(std::abs(report.mean_score - 100.0) < 7.0);  // chance is 0.2 per step

  opts.horizon = 50;
  CHECK_THROWS_AS(eval_long_horizon(ckpt, split, opts), ContractError);
}

TEST_CASE("eval: switching concatenates segments into one curve") {
  Checkpoint ckpt = make_checkpoint(GameId::LC, ArchVariant::AR_RNN, 3);
  auto split = split_random(GameId::LC, 60, 0);
  SwitchSchedule schedule;
  schedule.durations = {10, 15, 10};
  CHECK(schedule.total() == 35);

  auto report = eval_switching(ckpt, split, schedule, 16, 7);
  CHECK(report.episodes == 16);
  REQUIRE(report.curve.size() == 35);
  for (double c : report.curve) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
  auto again = eval_switching(ckpt, split, schedule, 16, 7);
  CHECK(report.curve == again.curve);

  CHECK_THROWS_AS(eval_switching(ckpt, split, SwitchSchedule{}, 16, 7), ContractError);
  CHECK_THROWS_AS(eval_switching(ckpt, split, SwitchSchedule{{10, 0}}, 16, 7), ContractError);
}

TEST_CASE("eval: matrix stats on a hand-built matrix") {
  CrossPlayMatrix m;
  m.row_labels = {"a", "b"};
  m.col_labels = {"a", "b"};
  m.cells = {{1.0, 2.0}, {3.0, 4.0}};
  auto stats = matrix_stats(m);
  CHECK(stats.diag_mean == doctest::Approx(2.5));
  CHECK(stats.diag_std == doctest::Approx(1.5));
  CHECK(stats.offdiag_mean == doctest::Approx(2.5));
  CHECK(stats.offdiag_std == doctest::Approx(0.5));
  CHECK(stats.grid_mean == doctest::Approx(2.5));
  CHECK(stats.grid_std == doctest::Approx(std::sqrt(1.25)));

  CrossPlayMatrix rect;
  rect.row_labels = {"a"};
  rect.col_labels = {"x", "y"};
  rect.cells = {{2.0, 4.0}};
  auto rs = matrix_stats(rect);
  CHECK(!rect.square());
  CHECK(rs.grid_mean == doctest::Approx(3.0));
  CHECK(rs.diag_mean == 0.0);  // untouched for non-square grids
}

TEST_CASE("eval: self crossplay produces square labeled matrices") {
  std::vector<Checkpoint> ckpts = {make_checkpoint(GameId::LC, ArchVariant::AR_RNN, 0),
                                   make_checkpoint(GameId::LC, ArchVariant::AR_RNN, 1)};
  auto m = crossplay_self_mrl(ckpts, 6, 3);
  CHECK(m.game == GameId::LC);
  CHECK(m.square());
  REQUIRE(m.row_labels.size() == 2);
  CHECK(m.row_labels[0] == "seed_0");
  CHECK(m.col_labels[1] == "seed_1");
  for (const auto& row : m.cells) {
    for (double c : row) {
      CHECK(c >= 0.0);
      CHECK(c <= 50.0);
    }
  }
}

TEST_CASE("eval: dsl crossplay orients rows as listeners") {
  // a speaker-biased pair: p0 maps every landmark to message 0; a listener
  // that maps message 0 to landmark... the guess only matches by chance, so
  // instead check the wiring through seat asymmetry: two different nets give
  // an asymmetric matrix in general, and the cell layout is row = listener.
  std::vector<Checkpoint> ckpts = {make_checkpoint(GameId::DSL, ArchVariant::AR_RNN, 0),
                                   make_checkpoint(GameId::DSL, ArchVariant::AR_RNN, 1)};
  auto m = crossplay_self_mrl(ckpts, 8, 5);
  CHECK(m.game == GameId::DSL);
  CHECK(m.square());
  // determinism across calls
  auto again = crossplay_self_mrl(ckpts, 8, 5);
  CHECK(m.cells == again.cells);
}

TEST_CASE("eval: il crossplay diagonal pairs the trained partners") {
  IlPair a{make_checkpoint(GameId::LC, ArchVariant::AR_RNN, 0),
           make_checkpoint(GameId::LC, ArchVariant::AR_RNN, 10), "run_a"};
  IlPair b{make_checkpoint(GameId::LC, ArchVariant::AR_RNN, 1),
           make_checkpoint(GameId::LC, ArchVariant::AR_RNN, 11), "run_b"};
  auto m = crossplay_self_il({a, b}, 6, 9);
  CHECK(m.square());
  CHECK(m.row_labels == std::vector<std::string>{"run_a", "run_b"});

  // oracle for one cell: row 0, col 1 pairs b.p0 with a.p1 under cell index 1
  GruNetwork<float> n0(&b.p0.params);
  GruNetwork<float> n1(&a.p1.params);
  auto [r0, r1] = run_net_vs_net({&n0, b.p0.arch}, {&n1, a.p1.arch}, GameId::LC, 6, 50, 9,
                                 1 * 6, RecordLevel::Rewards);
  double sum = 0.0;
  for (const auto& lane : r0) sum += lane.total_return();
  CHECK(m.cells[0][1] == doctest::Approx(sum / 6).epsilon(1e-12));
}

TEST_CASE("eval: adhoc grid is meta rows by il columns") {
  std::vector<Checkpoint> mrl = {make_checkpoint(GameId::DSL, ArchVariant::AR_RNN, 0)};
  IlPair pair{make_checkpoint(GameId::DSL, ArchVariant::AR_RNN, 5),
              make_checkpoint(GameId::DSL, ArchVariant::AR_RNN, 6), "seed_0"};
  auto m = adhoc_mrl_il(mrl, {pair}, 10, 2);
  CHECK(!m.cells.empty());
  CHECK(m.row_labels == std::vector<std::string>{"mrl_seed_0"});
  CHECK(m.col_labels == std::vector<std::string>{"il_seed_0"});

  // oracle: il speaker at seat 0, meta net at seat 1
  GruNetwork<float> sp(&pair.p0.params);
  GruNetwork<float> li(&mrl[0].params);
  auto [r0, r1] = run_net_vs_net({&sp, pair.p0.arch}, {&li, mrl[0].arch}, GameId::DSL, 10, 50,
                                 2, 0, RecordLevel::Rewards);
  double sum = 0.0;
  for (const auto& lane : r0) sum += lane.total_return();
  CHECK(m.cells[0][0] == doctest::Approx(sum / 10).epsilon(1e-12));
}
