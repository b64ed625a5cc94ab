#pragma once

#include <cmath>

#include "tensor/rng.hpp"
#include "tensor/tensor.hpp"

namespace attn {

/// Uniform in +-sqrt(6 / fan_in), drawn in row-major order.
inline Tensor uniform_fan_in(Shape shape, int fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace attn
