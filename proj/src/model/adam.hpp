#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tensor/tape.hpp"

namespace attn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<Tensor> m;  // first moments, aligned with the parameter list
  std::vector<Tensor> v;  // second moments
};

/// One bias-corrected Adam update using each parameter's grad. Empty state
/// is initialized to zeros; a state that does not match the parameter list
/// throws ShapeError.
void adam_step(std::span<Parameter* const> params, AdamState& state, const AdamConfig& cfg);

}  // namespace attn
