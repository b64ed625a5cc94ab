#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "losses/losses.hpp"
#include "model/adam.hpp"
#include "model/dataset.hpp"
#include "model/patchnet.hpp"

namespace attn {

struct TrainConfig {
  AdamConfig adam;
  int batch = 16;  // half real, half fake
  int epochs = 10;
  std::uint64_t seed = 7;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double cls_loss = 0.0;
  double map_loss = 0.0;
  double total_loss = 0.0;
  double val_auc = 0.0;  // NaN when the validation split lacks a label
};

struct History {
  std::vector<EpochStats> epochs;
  /// Header "epoch,cls_loss,map_loss,total_loss,val_auc".
  std::string to_csv() const;
};

/// Per epoch: shuffle the real and fake training pools, draw balanced batches
/// (remainder dropped), and take one Adam step per batch.
History train(PatchNet& model, AdamState& state, const Dataset& ds, const TrainConfig& cfg, const LossConfig& loss);

/// Supervision targets at the model's map resolution: 0 for real, 1 for entire
/// fakes, the area-averaged mask for partial fakes.
Tensor map_targets(const Dataset& ds, std::span<const std::size_t> indices, int map_size);

}  // namespace attn
