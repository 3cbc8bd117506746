#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "metacoop/params.hpp"
#include "metacoop/policy.hpp"

namespace metacoop {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  GameId game = GameId::LC;
  ArchVariant arch = ArchVariant::AR_RNN;
  std::uint64_t seed = 0;
  std::int64_t timesteps_trained = 0;
  ParamSet<float> params;
};

inline nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& t : ckpt.params.layout().tensors) {
    nlohmann::json data = nlohmann::json::array();
    const float* v = ckpt.params.data(t);
    const std::size_t n = static_cast<std::size_t>(t.rows) * t.cols;
    // float -> double is exact, and doubles round-trip through JSON text,
    // so saved parameters reload bit-identically.
    for (std::size_t i = 0; i < n; ++i) data.push_back(static_cast<double>(v[i]));
    tensors[t.name] = {{"shape", {t.rows, t.cols}}, {"data", std::move(data)}};
  }
  return nlohmann::json{{"format_version", ckpt.format_version},
                        {"game", to_string(ckpt.game)},
                        {"arch_variant", to_string(ckpt.arch)},
                        {"seed", ckpt.seed},
                        {"timesteps_trained", ckpt.timesteps_trained},
                        {"params", std::move(tensors)}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint ckpt;
  check(j.is_object(), "checkpoint: expected a JSON object");
  check(j.value("format_version", -1) == kCheckpointFormatVersion,
        "checkpoint: unsupported format_version");
  ckpt.game = game_from_string(j.at("game").get<std::string>());
  ckpt.arch = arch_from_string(j.at("arch_variant").get<std::string>());
  ckpt.seed = j.at("seed").get<std::uint64_t>();
  ckpt.timesteps_trained = j.at("timesteps_trained").get<std::int64_t>();

  ckpt.params = ParamSet<float>(make_policy_layout(arch_input_dim(ckpt.game, ckpt.arch)));
  const auto& tensors = j.at("params");
  check(tensors.is_object(), "checkpoint: params must be an object");
  std::size_t seen = 0;
  for (const auto& t : ckpt.params.layout().tensors) {
    check(tensors.contains(t.name), "checkpoint: missing tensor " + t.name);
    const auto& jt = tensors.at(t.name);
    const auto shape = jt.at("shape").get<std::vector<int>>();
    check(shape.size() == 2 && shape[0] == t.rows && shape[1] == t.cols,
          "checkpoint: shape mismatch for " + t.name);
    const auto& data = jt.at("data");
    const std::size_t n = static_cast<std::size_t>(t.rows) * t.cols;
    check(data.is_array() && data.size() == n, "checkpoint: data length mismatch for " + t.name);
    float* v = ckpt.params.data(t);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(data[i].get<double>());
    ++seen;
  }
  check(tensors.size() == seen, "checkpoint: unknown tensors present");
  check(ckpt.params.values_finite(), "checkpoint: non-finite parameter values");
  ckpt.params.sync_transposes();
  return ckpt;
}

}  // namespace metacoop
