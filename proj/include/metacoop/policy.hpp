#pragma once

#include <string>
#include <vector>

#include "metacoop/game.hpp"
#include "metacoop/gru.hpp"
#include "metacoop/partners.hpp"

namespace metacoop {

// Input-feature variants: whether the previous own action (one-hot) and the
// previous shared reward (scalar) are appended to the observation.
enum class ArchVariant { RNN, A_RNN, R_RNN, AR_RNN };

inline bool include_prev_action(ArchVariant v) {
  return v == ArchVariant::A_RNN || v == ArchVariant::AR_RNN;
}

inline bool include_prev_reward(ArchVariant v) {
  return v == ArchVariant::R_RNN || v == ArchVariant::AR_RNN;
}

inline std::string to_string(ArchVariant v) {
  switch (v) {
    case ArchVariant::RNN: return "rnn";
    case ArchVariant::A_RNN: return "a_rnn";
    case ArchVariant::R_RNN: return "r_rnn";
    case ArchVariant::AR_RNN: return "ar_rnn";
  }
  throw ContractError("bad ArchVariant");
}

inline ArchVariant arch_from_string(const std::string& s) {
  if (s == "rnn") return ArchVariant::RNN;
  if (s == "a_rnn") return ArchVariant::A_RNN;
  if (s == "r_rnn") return ArchVariant::R_RNN;
  if (s == "ar_rnn") return ArchVariant::AR_RNN;
  throw ContractError("unknown architecture variant: " + s);
}

inline constexpr int kRoleBits = 2;

// Policy-side observation: the game observation, plus a two-bit role one-hot
// in DSL ((1,0) speaker / (0,1) listener) so one network can play both sides.
inline int policy_obs_dim(GameId g) {
  return g == GameId::LC ? kNumActions : kNumActions + kRoleBits;
}

inline int arch_input_dim(GameId g, ArchVariant v) {
  return policy_obs_dim(g) + (include_prev_action(v) ? kNumActions : 0) +
         (include_prev_reward(v) ? 1 : 0);
}

inline void compose_policy_obs(GameId g, const std::vector<float>& raw, int env_player,
                               float* out) {
  const int raw_dim = g == GameId::LC ? kNumActions : kNumActions;
  check(static_cast<int>(raw.size()) == raw_dim, "compose_policy_obs: bad raw obs dim");
  for (int i = 0; i < raw_dim; ++i) out[i] = raw[i];
  if (g == GameId::DSL) {
    out[raw_dim + 0] = env_player == 0 ? 1.0f : 0.0f;
    out[raw_dim + 1] = env_player == 1 ? 1.0f : 0.0f;
  }
}

// [obs | one-hot(prev_action) if flagged | prev_reward if flagged]; history
// slots are zero at t=0 (prev_action = -1 encodes "none").
template <typename S>
void encode_input(GameId g, ArchVariant v, const float* pobs, int prev_action, float prev_reward,
                  S* out) {
  const int od = policy_obs_dim(g);
  int k = 0;
  for (int i = 0; i < od; ++i) out[k++] = static_cast<S>(pobs[i]);
  if (include_prev_action(v)) {
    for (int i = 0; i < kNumActions; ++i) out[k++] = S(0);
    if (prev_action >= 0) {
      check(prev_action < kNumActions, "encode_input: prev_action out of range");
      out[k - kNumActions + prev_action] = S(1);
    }
  }
  if (include_prev_reward(v)) out[k++] = static_cast<S>(prev_reward);
}

// Walks the legal entries in index order; one uniform draw per call.
inline int sample_masked(const float* probs, const Mask5& mask, RngStream& rng) {
  const double u = rng.next_double();
  double cum = 0.0;
  int last_legal = -1;
  for (int c = 0; c < kNumActions; ++c) {
    if (!mask[c]) continue;
    last_legal = c;
    cum += static_cast<double>(probs[c]);
    if (u < cum) return c;
  }
  check(last_legal >= 0, "sample_masked: all actions masked");
  return last_legal;  // numerical slack: probabilities may sum to 1 - eps
}

inline int argmax_masked(const float* probs, const Mask5& mask) {
  int best = -1;
  for (int c = 0; c < kNumActions; ++c) {
    if (!mask[c]) continue;
    if (best < 0 || probs[c] > probs[best]) best = c;
  }
  check(best >= 0, "argmax_masked: all actions masked");
  return best;
}

// Minimal per-episode agent interface for the single-episode runner. `t` is
// the agent-local timestep (segment-local under partner switching).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void begin_episode() = 0;
  virtual int act(int t, const std::vector<float>& obs, const Mask5& mask, RngStream& rng) = 0;
  // Own action + shared reward, delivered after the step commits.
  virtual void feedback(int action, float reward) {
    (void)action;
    (void)reward;
  }
};

class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(PartnerSpec spec) : spec_(std::move(spec)) {}
  void begin_episode() override {}
  int act(int t, const std::vector<float>& obs, const Mask5& mask, RngStream& rng) override {
    (void)mask;
    (void)rng;
    return scripted_action(spec_, t, obs);
  }

 private:
  PartnerSpec spec_;
};

// Recurrent policy driving one env player through the generic Agent
// interface (batch of one). The lockstep batch engine reproduces exactly
// this computation row-by-row.
class NetAgent : public Agent {
 public:
  NetAgent(const GruNetwork<float>* net, GameId game, ArchVariant arch, int env_player,
           bool greedy = false)
      : net_(net), game_(game), arch_(arch), env_player_(env_player), greedy_(greedy) {
    check(net->input_dim() == arch_input_dim(game, arch),
          "NetAgent: network input width does not match game/arch");
    x_.resize(1, net->input_dim());
    pobs_.resize(policy_obs_dim(game));
  }

  void begin_episode() override {
    state_.reset(1);
    prev_action_ = -1;
    prev_reward_ = 0.0f;
  }

  int act(int t, const std::vector<float>& obs, const Mask5& mask, RngStream& rng) override {
    (void)t;
    compose_policy_obs(game_, obs, env_player_, pobs_.data());
    encode_input(game_, arch_, pobs_.data(), prev_action_, prev_reward_, x_.row(0));
    net_->forward(x_, state_, logits_, value_, ws_);
    unsigned char m8[kNumActions];
    for (int c = 0; c < kNumActions; ++c) m8[c] = mask[c] ? 1 : 0;
    float logp[kNumActions];
    kernels::masked_log_softmax_row(logits_.row(0), m8, logp, kNumActions);
    float probs[kNumActions];
    for (int c = 0; c < kNumActions; ++c) probs[c] = std::exp(logp[c]);
    const int action = greedy_ ? argmax_masked(probs, mask) : sample_masked(probs, mask, rng);
    last_log_prob_ = logp[action];
    last_value_ = value_.at(0, 0);
    return action;
  }

  void feedback(int action, float reward) override {
    prev_action_ = action;
    prev_reward_ = reward;
  }

  float last_log_prob() const { return last_log_prob_; }
  float last_value() const { return last_value_; }
  int env_player() const { return env_player_; }

 private:
  const GruNetwork<float>* net_;
  GameId game_;
  ArchVariant arch_;
  int env_player_;
  bool greedy_;
  GruNetwork<float>::State state_;
  GruNetwork<float>::Workspace ws_;
  Mat<float> x_, logits_, value_;
  std::vector<float> pobs_;
  int prev_action_ = -1;
  float prev_reward_ = 0.0f;
  float last_log_prob_ = 0.0f;
  float last_value_ = 0.0f;
};

}  // namespace metacoop
