#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "losses/losses.hpp"
#include "model/evaluate.hpp"
#include "model/patchnet.hpp"
#include "model/train.hpp"
#include "synthgen/synthgen.hpp"

namespace attn {

/// Everything an experiment needs, read from one JSON document with the
/// sections gen, model, train, loss and eval. A top-level "seed" feeds every
/// section that does not set its own.
struct RunConfig {
  std::uint64_t seed = 7;
  GenConfig gen;
  PatchNetConfig model;
  TrainConfig train;
  LossConfig loss;
  EvalConfig eval;

  void validate() const;
  /// Replaces the top-level and every per-section seed.
  void override_seed(std::uint64_t s);
};

/// Throws UsageError on malformed JSON, unknown keys, wrong types or invalid
/// values.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

nlohmann::ordered_json to_json(const PatchNetConfig& cfg);
nlohmann::ordered_json to_json(const TrainConfig& cfg);
nlohmann::ordered_json to_json(const LossConfig& cfg);
PatchNetConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
LossConfig loss_config_from_json(const nlohmann::json& j);

}  // namespace attn
