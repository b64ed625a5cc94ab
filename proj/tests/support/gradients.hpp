#pragma once

#include <functional>
#include <vector>

#include "tensor/gradcheck.hpp"

namespace testing_support {

using OpBuilder = std::function<attn::Var(attn::Tape&, std::vector<attn::Var>&)>;

struct OpCheckSummary {
  double worst = 0.0;  // largest relative error over all instances
  std::size_t checked = 0;
  int instances = 0;
};

/// Central-difference check of `op` on `instances` seeded random inputs of the
/// given shapes. The output is reduced against fixed random weights so every
/// element carries a distinct gradient. Every coordinate is checked.
OpCheckSummary check_op(const OpBuilder& op, const std::vector<attn::Shape>& shapes, int instances = 20,
                        double lo = -1.0, double hi = 1.0);

}  // namespace testing_support
