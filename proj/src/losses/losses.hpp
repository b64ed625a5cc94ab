#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "tensor/tape.hpp"

namespace attn {

enum class MapRegime { Supervised, Weak, Unsupervised };

std::string_view to_string(MapRegime r);
MapRegime map_regime_from_string(std::string_view s);

struct LossConfig {
  double lambda = 1.0;
  MapRegime regime = MapRegime::Supervised;
  double weak_target = 0.75;

  /// Throws UsageError when lambda < 0 or weak_target is outside (0, 1).
  void validate() const;
  /// Coefficient actually applied to the map term (0 when unsupervised).
  double map_weight() const { return regime == MapRegime::Unsupervised ? 0.0 : lambda; }
};

inline constexpr int kLabelReal = 0;
inline constexpr int kLabelFake = 1;

// Batched losses take N-leading inputs (logits N x 2, maps N x H x W [x 1])
// and return one value per sample as an N-vector. Unbatched inputs (logits of
// length 2, a single H x W map) return a scalar.

/// -ln softmax(logits)[label], computed without forming the softmax.
Var classification_loss(Var logits, std::span<const int> labels);

/// Mean over pixels of |prob_map - gt|.
Var map_loss_supervised(Var prob_map, const Tensor& gt);

/// Real: mean |prob_map|. Fake: |max(prob_map) - weak_target|; the max's
/// gradient goes to the first maximal pixel in row-major order.
Var map_loss_weak(Var prob_map, std::span<const int> labels, float weak_target);

/// mean(cls) + map_weight * mean(map). `map` may be absent for the
/// unsupervised regime or a model without attention.
Var total_loss(Var cls, std::optional<Var> map, const LossConfig& cfg);
double total_loss(double cls, double map, const LossConfig& cfg);

}  // namespace attn
