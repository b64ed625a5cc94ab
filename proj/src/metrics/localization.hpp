#pragma once

#include <optional>

#include "masks/image.hpp"

namespace attn {

struct LocalizationScores {
  double iinc = 0.0;
  std::optional<double> iou;
  std::optional<double> cosine;
  double pbca = 0.0;
};

/// Inverse Intersection Non-Containment. The union term in the prefactor is
/// the active area fraction, so the result stays in [0, 1].
double iinc(const ManipMask& pred, const ManipMask& gt);

/// Empty when the union is empty.
std::optional<double> iou(const ManipMask& pred, const ManipMask& gt);

/// Empty when either map has zero norm.
std::optional<double> cosine_sim(const ProbMap& pred, const ProbMap& gt);

double pbca(const ManipMask& pred, const ManipMask& gt);

/// Binarizes pred at thresh for the mask metrics; cosine uses the raw map.
LocalizationScores score_localization(const ProbMap& pred, const ManipMask& gt, double thresh);

}  // namespace attn
