#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "tensor/tape.hpp"

namespace attn {

using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckOptions {
  float eps = 1e-3f;
  /// Coordinates sampled per parameter tensor; 0 checks every coordinate.
  std::size_t samples_per_param = 8;
  std::uint64_t seed = 0;
  /// Replay the unperturbed pass's branch decisions (relu signs, argmax
  /// indices) during the perturbed passes, so differences are taken on one
  /// smooth piece. When false, coordinates whose perturbation changes any
  /// decision are skipped instead.
  bool freeze_branches = true;
};

struct GradCheckResult {
  /// max over checked coordinates of |analytic - numeric| / max(1, |numeric|)
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Central-difference check of the tape's gradients. `build` must construct
/// the loss on the given tape, registering `params` through Tape::param.
GradCheckResult grad_check(const LossBuilder& build, std::span<Parameter* const> params,
                           const GradCheckOptions& options = {});

}  // namespace attn
