#include "metacoop/partners.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "metacoop/rng.hpp"

namespace metacoop {

std::vector<PartnerSpec> enumerate_partners(GameId game) {
  std::vector<PartnerSpec> out;
  out.reserve(120);
  Perm5 p = {0, 1, 2, 3, 4};
  int id = 0;
  do {
    PartnerSpec spec;
    spec.game_id = game;
    spec.perm = p;
    spec.role = PartnerRole::Symmetric;
    spec.id = id++;
    out.push_back(spec);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

namespace {

int decode_onehot(const std::vector<float>& obs) {
  for (int i = 0; i < kNumActions; ++i) {
    if (obs[i] > 0.5f) return i;
  }
  throw ContractError("scripted_action: observation payload has no set bit");
}

}  // namespace

int scripted_action(const PartnerSpec& partner, int t, const std::vector<float>& obs) {
  check(t >= 0, "scripted_action: negative timestep");
  if (partner.game_id == GameId::LC) {
    return partner.perm[t % kNumActions];
  }
  return partner.perm[decode_onehot(obs)];
}

PartnerSplit split_random(GameId game, int n_train, std::uint64_t seed) {
  check(n_train >= 0 && n_train <= 120, "split_random: n_train must be in [0, 120]");
  std::vector<int> ids(120);
  std::iota(ids.begin(), ids.end(), 0);
  RngStream rng(seed, "partner_split", 0);
  for (int i = 119; i > 0; --i) {
    std::swap(ids[i], ids[rng.next_below(static_cast<std::uint32_t>(i + 1))]);
  }
  PartnerSplit split;
  split.game_id = game;
  split.kind = SplitKind::Random;
  split.seed = seed;
  split.train.assign(ids.begin(), ids.begin() + n_train);
  split.test.assign(ids.begin() + n_train, ids.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

PartnerSplit subset_quantity(const PartnerSplit& split, int k, std::uint64_t seed) {
  check(k >= 1 && k <= static_cast<int>(split.train.size()),
        "subset_quantity: k must be in [1, train side size]");
  std::vector<int> order = split.train;
  RngStream rng(seed, "quantity_subset", 0);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    std::swap(order[i], order[rng.next_below(static_cast<std::uint32_t>(i + 1))]);
  }
  PartnerSplit out;
  out.game_id = split.game_id;
  out.kind = SplitKind::Quantity;
  out.seed = seed;
  out.train.assign(order.begin(), order.begin() + k);
  out.test = split.test;
  std::sort(out.train.begin(), out.train.end());
  return out;
}

std::vector<std::vector<int>> lc_cyclic_classes() {
  const auto pool = enumerate_partners(GameId::LC);
  auto rank_of = [&pool](const Perm5& p) {
    for (const auto& spec : pool) {
      if (spec.perm == p) return spec.id;
    }
    throw ContractError("lc_cyclic_classes: permutation not found");
  };

  std::vector<std::vector<int>> classes;
  std::vector<bool> seen(120, false);
  for (const auto& spec : pool) {
    if (seen[spec.id]) continue;
    std::vector<int> members;
    Perm5 p = spec.perm;
    for (int s = 0; s < kNumActions; ++s) {
      int r = rank_of(p);
      if (!seen[r]) {
        seen[r] = true;
        members.push_back(r);
      }
      std::rotate(p.begin(), p.begin() + 1, p.end());
    }
    std::sort(members.begin(), members.end());
    classes.push_back(members);
  }
  return classes;
}

namespace {

int same_index_entries(const Perm5& a, const Perm5& b) {
  int n = 0;
  for (int i = 0; i < kNumActions; ++i) n += a[i] == b[i] ? 1 : 0;
  return n;
}

}  // namespace

PartnerSplit split_skewed_lc() {
  const auto pool = enumerate_partners(GameId::LC);
  const auto classes = lc_cyclic_classes();
  const int n_classes = static_cast<int>(classes.size());

  // Classes are linked when any member pair agrees on >= 3 indices.
  std::vector<std::vector<int>> link_count(n_classes, std::vector<int>(n_classes, 0));
  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b) {
      int links = 0;
      for (int i : classes[a]) {
        for (int j : classes[b]) {
          if (same_index_entries(pool[i].perm, pool[j].perm) >= 3) ++links;
        }
      }
      link_count[a][b] = links;
      link_count[b][a] = links;
    }
  }

  // Seed with the class of the identity pattern (rank 0), then grow by the
  // class with the most links into the current selection; ties break toward
  // the lowest member rank. 12 classes of 5 yield exactly 60 train partners.
  std::vector<bool> selected(n_classes, false);
  int seed_class = -1;
  for (int c = 0; c < n_classes; ++c) {
    if (std::find(classes[c].begin(), classes[c].end(), 0) != classes[c].end()) seed_class = c;
  }
  selected[seed_class] = true;
  int n_selected = 1;
  while (n_selected < 12) {
    int best = -1;
    int best_links = -1;
    for (int c = 0; c < n_classes; ++c) {
      if (selected[c]) continue;
      int links = 0;
      for (int s = 0; s < n_classes; ++s) {
        if (selected[s]) links += link_count[c][s];
      }
      if (links > best_links || (links == best_links && best >= 0 && classes[c][0] < classes[best][0])) {
        best = c;
        best_links = links;
      }
    }
    selected[best] = true;
    ++n_selected;
  }

  PartnerSplit split;
  split.game_id = GameId::LC;
  split.kind = SplitKind::Skewed;
  split.seed = 0;
  for (int c = 0; c < n_classes; ++c) {
    auto& side = selected[c] ? split.train : split.test;
    side.insert(side.end(), classes[c].begin(), classes[c].end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

PartnerSplit split_skewed_dsl() {
  PartnerSplit split;
  split.game_id = GameId::DSL;
  split.kind = SplitKind::Skewed;
  split.seed = 0;
  // Enumeration order is lexicographic, so ranks sort the behavior lists.
  for (int id = 0; id < 60; ++id) split.train.push_back(id);
  for (int id = 60; id < 120; ++id) split.test.push_back(id);
  return split;
}

std::string to_string(SplitKind k) {
  switch (k) {
    case SplitKind::Random: return "random";
    case SplitKind::Skewed: return "skewed";
    case SplitKind::Quantity: return "quantity";
  }
  return "random";
}

SplitKind split_kind_from_string(const std::string& s) {
  if (s == "random") return SplitKind::Random;
  if (s == "skewed") return SplitKind::Skewed;
  if (s == "quantity") return SplitKind::Quantity;
  throw ContractError("unknown split kind: " + s);
}

std::string split_to_json(const PartnerSplit& split) {
  nlohmann::json j;
  j["game"] = to_string(split.game_id);
  j["kind"] = to_string(split.kind);
  j["seed"] = split.seed;
  j["train"] = split.train;
  j["test"] = split.test;
  return j.dump(2);
}

PartnerSplit split_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PartnerSplit split;
  split.game_id = game_from_string(j.at("game").get<std::string>());
  split.kind = split_kind_from_string(j.at("kind").get<std::string>());
  split.seed = j.at("seed").get<std::uint64_t>();
  split.train = j.at("train").get<std::vector<int>>();
  split.test = j.at("test").get<std::vector<int>>();
  return split;
}

}  // namespace metacoop
