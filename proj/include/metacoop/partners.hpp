#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "metacoop/game.hpp"

namespace metacoop {

using Perm5 = std::array<int, kNumActions>;

enum class PartnerRole { Symmetric, Speaker, Listener };

// A scripted partner is a permutation of the five symbols. In LC it is the
// repeating lever pattern; in DSL it is the landmark->message map (speaker)
// or the message->landmark map (listener), used as stored, not inverted.
struct PartnerSpec {
  GameId game_id;
  Perm5 perm;
  PartnerRole role = PartnerRole::Symmetric;
  int id = -1;  // lexicographic rank, 0..119

  bool operator==(const PartnerSpec& o) const {
    return game_id == o.game_id && perm == o.perm && role == o.role;
  }
};

enum class SplitKind { Random, Skewed, Quantity };

struct PartnerSplit {
  GameId game_id;
  SplitKind kind = SplitKind::Random;
  std::uint64_t seed = 0;
  std::vector<int> train;  // partner ids
  std::vector<int> test;
};

// All 5! = 120 permutations in lexicographic order; ids are ranks.
std::vector<PartnerSpec> enumerate_partners(GameId game);

// Pure function of (partner, t, obs). LC: perm[t mod 5]. DSL: the
// permutation applied to the observed landmark (speaker) or message
// (listener), decoded from the one-hot payload.
int scripted_action(const PartnerSpec& partner, int t, const std::vector<float>& obs);

// Deterministic shuffle by seed; first n_train ids become the train side.
PartnerSplit split_random(GameId game, int n_train, std::uint64_t seed);

// Train side reduced to k partners drawn from a single seed-shuffled order,
// so subsets are nested across k. Test side unchanged.
PartnerSplit subset_quantity(const PartnerSplit& split, int k, std::uint64_t seed);

// LC similarity split: the 120 patterns partition into 24 cyclic-shift
// classes of 5; classes are additionally linked when any two members agree
// on >= 3 indices. Whole classes are accumulated greedily from the class of
// the identity pattern, preferring the class most linked to the selection,
// until the train side holds exactly 60 partners.
PartnerSplit split_skewed_lc();

// DSL similarity split: lexicographic sort, first 60 train, last 60 test.
PartnerSplit split_skewed_dsl();

// Cyclic-shift equivalence classes over all 120 patterns (24 classes of 5),
// each class listed as sorted partner ids. Exposed for tests and the skewed
// split construction.
std::vector<std::vector<int>> lc_cyclic_classes();

std::string to_string(SplitKind k);
SplitKind split_kind_from_string(const std::string& s);

std::string split_to_json(const PartnerSplit& split);
PartnerSplit split_from_json(const std::string& text);

}  // namespace metacoop
