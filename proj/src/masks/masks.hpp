#pragma once

#include "masks/image.hpp"

namespace attn {

inline constexpr double kDefaultMaskThreshold = 0.1;

enum class ConstantMaskKind { Real, EntireFake };

/// Per pixel g = mean over RGB of |source - fake| / 255; 1 where g > thresh.
ManipMask derive_gt_mask(const RgbImage& source, const RgbImage& fake, double thresh = kDefaultMaskThreshold);

/// All zeros for real faces, all ones for entirely synthesized ones.
ManipMask constant_mask(ConstantMaskKind kind, int width, int height);

/// Area average over integer blocks. Block size must divide the mask.
ProbMap downsample_mask(const ManipMask& mask, int out_height, int out_width);

/// 1 where value > thresh (strict). thresh must lie in (0, 1).
ManipMask binarize(const ProbMap& map, double thresh = kDefaultMaskThreshold);

/// Nearest-neighbour enlargement by integer factors.
ProbMap upsample_nearest(const ProbMap& map, int out_height, int out_width);

}  // namespace attn
