#pragma once

#include <string>

#include "losses/losses.hpp"
#include "model/adam.hpp"
#include "model/patchnet.hpp"
#include "model/train.hpp"

namespace attn {

struct Checkpoint {
  PatchNet model;
  AdamState adam;
  TrainConfig train;
  LossConfig loss;
};

/// Writes parameters, Adam moments ("adam.m.<name>", "adam.v.<name>") and,
/// for the mam variant, the basis ("mam.mean", "mam.basis") to an ATNT file,
/// plus `<path>.meta.json` with the configs and step counter.
void save_checkpoint(const std::string& path, const PatchNet& model, const AdamState& state, const TrainConfig& train,
                     const LossConfig& loss);

/// Throws FormatError on a malformed container or sidecar; nothing is
/// returned unless every tensor loaded.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace attn
