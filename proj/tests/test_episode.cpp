#include <doctest.h>

#include <algorithm>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "metacoop/episode.hpp"
#include "metacoop/game.hpp"
#include "metacoop/params.hpp"
#include "metacoop/partners.hpp"
#include "metacoop/policy.hpp"

using namespace metacoop;

namespace {

PartnerSpec lc_partner(Perm5 perm) {
  PartnerSpec p;
  p.game_id = GameId::LC;
  p.perm = perm;
  p.role = PartnerRole::Symmetric;
  return p;
}

PartnerSpec dsl_partner(Perm5 perm, PartnerRole role) {
  PartnerSpec p;
  p.game_id = GameId::DSL;
  p.perm = perm;
  p.role = role;
  return p;
}

}  // namespace

TEST_CASE("episode: identical lever patterns score the full horizon") {
  auto game = make_game(GameId::LC);
  ScriptedAgent a(lc_partner({2, 0, 4, 1, 3}));
  ScriptedAgent b(lc_partner({2, 0, 4, 1, 3}));
  auto rec = run_episode(*game, a, b, 50, 7, 0);
  CHECK(rec.horizon == 50);
  CHECK(rec.steps.size() == 50);
  CHECK(rec.total_return() == 50.0);
}

TEST_CASE("episode: a cyclic shift never matches") {
  auto game = make_game(GameId::LC);
  ScriptedAgent a(lc_partner({2, 0, 4, 1, 3}));
  ScriptedAgent b(lc_partner({0, 4, 1, 3, 2}));  // shifted by one
  auto rec = run_episode(*game, a, b, 50, 7, 0);
  CHECK(rec.total_return() == 0.0);
}

TEST_CASE("episode: a speaker with the inverse listener map is perfect") {
  Perm5 speak = {1, 2, 0, 4, 3};  // a 3-cycle plus a swap, so speak is not its own inverse
  Perm5 listen;                   // inverse: listen[speak[l]] = l
  for (int l = 0; l < 5; ++l) listen[static_cast<size_t>(speak[static_cast<size_t>(l)])] = l;
  auto game = make_game(GameId::DSL);
  ScriptedAgent sp(dsl_partner(speak, PartnerRole::Speaker));
  ScriptedAgent li(dsl_partner(listen, PartnerRole::Listener));
  auto rec = run_episode(*game, sp, li, 50, 11, 3);
  CHECK(rec.total_return() == 50.0);

  // a listener reusing the speaker's own map only matches on the fixed
  // points of speak applied twice: landmarks 3 and 4 here
  auto game2 = make_game(GameId::DSL);
  ScriptedAgent li2(dsl_partner(speak, PartnerRole::Listener));
  auto rec2 = run_episode(*game2, sp, li2, 50, 11, 3);
  CHECK(rec2.total_return() < 50.0);
  for (const auto& s : rec2.steps) {
    const int landmark = static_cast<int>(std::distance(
        s.obs_a.begin(), std::find(s.obs_a.begin(), s.obs_a.end(), 1.0f)));
    CHECK(s.reward == ((landmark == 3 || landmark == 4) ? 1.0f : 0.0f));
  }
}

TEST_CASE("episode: records carry observations, masks, and actions consistently") {
  auto game = make_game(GameId::LC);
  ScriptedAgent a(lc_partner({0, 1, 2, 3, 4}));
  ScriptedAgent b(lc_partner({1, 2, 3, 4, 0}));
  auto rec = run_episode(*game, a, b, 10, 3, 0);
  for (int t = 0; t < 10; ++t) {
    const auto& s = rec.steps[static_cast<size_t>(t)];
    CHECK(s.obs_a[static_cast<size_t>(t % 5)] == 1.0f);
    CHECK(s.obs_b[static_cast<size_t>(t % 5)] == 1.0f);
    CHECK(s.act_a == t % 5);
    CHECK(s.act_b == (t + 1) % 5);
    CHECK(s.reward == 0.0f);
    CHECK(popcount(s.mask_a) == 5 - (t % 5));
    CHECK(popcount(s.mask_b) == 5 - (t % 5));
  }
}

TEST_CASE("episode: same keys replay the same episode, different keys differ") {
  const int in_dim = arch_input_dim(GameId::LC, ArchVariant::AR_RNN);
  ParamLayout layout = make_policy_layout(in_dim);
  ParamSet<float> params = init_params<float>(layout, 2);
  GruNetwork<float> net(&params);

  auto run_one = [&](std::uint64_t seed, std::uint64_t index) {
    auto game = make_game(GameId::LC);
    NetAgent agent(&net, GameId::LC, ArchVariant::AR_RNN, 0);
    ScriptedAgent partner(lc_partner({4, 2, 0, 3, 1}));
    return run_episode(*game, agent, partner, 50, seed, index);
  };

  auto r1 = run_one(5, 9);
  auto r2 = run_one(5, 9);
  REQUIRE(r1.steps.size() == r2.steps.size());
  for (size_t t = 0; t < r1.steps.size(); ++t) {
    CHECK(r1.steps[t].act_a == r2.steps[t].act_a);
    CHECK(r1.steps[t].reward == r2.steps[t].reward);
  }

  auto r3 = run_one(5, 10);
  bool any_diff = false;
  for (size_t t = 0; t < r1.steps.size(); ++t) {
    any_diff = any_diff || r1.steps[t].act_a != r3.steps[t].act_a;
  }
  CHECK(any_diff);
}

TEST_CASE("episode: degenerate switching schedule equals the plain episode") {
  const int in_dim = arch_input_dim(GameId::LC, ArchVariant::AR_RNN);
  ParamLayout layout = make_policy_layout(in_dim);
  ParamSet<float> params = init_params<float>(layout, 6);
  GruNetwork<float> net(&params);

  PartnerSpec p = lc_partner({3, 0, 1, 4, 2});

  auto game1 = make_game(GameId::LC);
  NetAgent agent1(&net, GameId::LC, ArchVariant::AR_RNN, 0);
  auto plain = run_episode_with_switching(*game1, agent1, {{p, 100}}, 0, 13, 2);

  auto game2 = make_game(GameId::LC);
  NetAgent agent2(&net, GameId::LC, ArchVariant::AR_RNN, 0);
  auto split = run_episode_with_switching(*game2, agent2, {{p, 50}, {p, 50}}, 0, 13, 2);

  // same partner across the boundary: identical traffic, because the pattern
  // position is the only segment-local state and p repeats every 5 steps
  REQUIRE(plain.steps.size() == 100);
  REQUIRE(split.steps.size() == 100);
  for (size_t t = 0; t < plain.steps.size(); ++t) {
    CHECK(plain.steps[t].act_a == split.steps[t].act_a);
    CHECK(plain.steps[t].act_b == split.steps[t].act_b);
    CHECK(plain.steps[t].reward == split.steps[t].reward);
  }
}

TEST_CASE("episode: switching swaps the scripted pattern at the boundary") {
  PartnerSpec pa = lc_partner({0, 1, 2, 3, 4});
  PartnerSpec pb = lc_partner({4, 3, 2, 1, 0});
  auto game = make_game(GameId::LC);
  // the "net" seat is another scripted agent so the whole record is forced
  ScriptedAgent fixed(lc_partner({0, 1, 2, 3, 4}));
  auto rec = run_episode_with_switching(*game, fixed, {{pa, 7}, {pb, 8}}, 0, 1, 0);
  REQUIRE(rec.steps.size() == 15);
  // scripted partner occupies seat 1; its pattern position restarts at each
  // segment boundary
  for (int t = 0; t < 7; ++t) {
    CHECK(rec.steps[static_cast<size_t>(t)].act_b == pa.perm[static_cast<size_t>(t % 5)]);
  }
  for (int t = 7; t < 15; ++t) {
    CHECK(rec.steps[static_cast<size_t>(t)].act_b == pb.perm[static_cast<size_t>((t - 7) % 5)]);
  }
  // env availability (seat 0's mask) never reset: block position is global t
  for (int t = 0; t < 15; ++t) {
    CHECK(popcount(rec.steps[static_cast<size_t>(t)].mask_a) == 5 - (t % 5));
  }
}

TEST_CASE("episode: switching rejects an empty schedule") {
  auto game = make_game(GameId::LC);
  ScriptedAgent fixed(lc_partner({0, 1, 2, 3, 4}));
  CHECK_THROWS_AS(run_episode_with_switching(*game, fixed, {}, 0, 1, 0), ContractError);
}

TEST_CASE("episode: jsonl stream has exactly the advertised fields") {
  auto game = make_game(GameId::LC);
  ScriptedAgent a(lc_partner({0, 1, 2, 3, 4}));
  ScriptedAgent b(lc_partner({0, 2, 1, 4, 3}));
  auto rec = run_episode(*game, a, b, 6, 2, 0);
  std::string text = episode_to_jsonl(rec);

  std::istringstream lines(text);
  std::string line;
  int t = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.size() == 7);
    REQUIRE(j.contains("t"));
    REQUIRE(j.contains("obs_a"));
    REQUIRE(j.contains("obs_b"));
    REQUIRE(j.contains("mask_a"));
    REQUIRE(j.contains("act_a"));
    REQUIRE(j.contains("act_b"));
    REQUIRE(j.contains("reward"));
    CHECK(j["t"] == t);
    CHECK(j["obs_a"].size() == 5);
    CHECK(j["obs_b"].size() == 5);
    CHECK(j["mask_a"].size() == 5);
    CHECK(j["act_a"] == rec.steps[static_cast<size_t>(t)].act_a);
    CHECK(j["act_b"] == rec.steps[static_cast<size_t>(t)].act_b);
    ++t;
  }
  CHECK(t == 6);
}
