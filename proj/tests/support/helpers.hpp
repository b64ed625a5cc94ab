#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tensor/rng.hpp"
#include "tensor/tensor.hpp"

namespace testing_support {

inline attn::Tensor random_tensor(attn::Shape shape, attn::Rng& rng, double lo = -1.0, double hi = 1.0) {
  attn::Tensor t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

inline double max_abs_diff(const attn::Tensor& a, const attn::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double{a[i]} - double{b[i]}));
  return m;
}

/// Fresh scratch directory under the build tree's temp area.
std::string scratch_dir(const std::string& name);

}  // namespace testing_support
