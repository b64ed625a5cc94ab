#include "masks/masks.hpp"

#include <cstdlib>

#include "common/errors.hpp"

namespace attn {

ManipMask derive_gt_mask(const RgbImage& source, const RgbImage& fake, double thresh) {
  if (source.width != fake.width || source.height != fake.height) {
    throw UsageError("derive_gt_mask: images differ in size (" + std::to_string(source.width) + "x" +
                     std::to_string(source.height) + " vs " + std::to_string(fake.width) + "x" +
                     std::to_string(fake.height) + ")");
  }
  if (source.data.size() != fake.data.size()) throw ShapeError("derive_gt_mask: RGB buffers differ in length");
  ManipMask out(source.width, source.height);
  for (int y = 0; y < source.height; ++y) {
    for (int x = 0; x < source.width; ++x) {
      int diff = 0;
      for (int c = 0; c < 3; ++c) diff += std::abs(int{source.at(x, y, c)} - int{fake.at(x, y, c)});
      const double g = static_cast<double>(diff) / (3.0 * 255.0);
      out.set(x, y, g > thresh);
    }
  }
  return out;
}

ManipMask constant_mask(ConstantMaskKind kind, int width, int height) {
  return ManipMask(width, height, kind == ConstantMaskKind::EntireFake ? 1 : 0);
}

ProbMap downsample_mask(const ManipMask& mask, int out_height, int out_width) {
  if (out_height < 1 || out_width < 1 || mask.height() % out_height != 0 || mask.width() % out_width != 0) {
    throw UsageError("downsample_mask: " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                     " is not an integer multiple of " + std::to_string(out_width) + "x" +
                     std::to_string(out_height));
  }
  const int bh = mask.height() / out_height;
  const int bw = mask.width() / out_width;
  std::vector<float> v(static_cast<std::size_t>(out_height) * static_cast<std::size_t>(out_width));
  for (int oy = 0; oy < out_height; ++oy) {
    for (int ox = 0; ox < out_width; ++ox) {
      int on = 0;
      for (int y = 0; y < bh; ++y) {
        for (int x = 0; x < bw; ++x) on += mask.at(ox * bw + x, oy * bh + y);
      }
      v[static_cast<std::size_t>(oy) * static_cast<std::size_t>(out_width) + static_cast<std::size_t>(ox)] =
          static_cast<float>(static_cast<double>(on) / static_cast<double>(bh * bw));
    }
  }
  return ProbMap(out_width, out_height, std::move(v));
}

ManipMask binarize(const ProbMap& map, double thresh) {
  if (!(thresh > 0.0 && thresh < 1.0)) throw UsageError("binarize: threshold must lie in (0, 1)");
  std::vector<std::uint8_t> v(map.size());
  // compared at map precision, so a stored 0.1f is not above a 0.1 threshold
  const auto t = static_cast<float>(thresh);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = map[i] > t ? 1 : 0;
  return ManipMask(map.width(), map.height(), std::move(v));
}

ProbMap upsample_nearest(const ProbMap& map, int out_height, int out_width) {
  if (out_height < 1 || out_width < 1 || out_height % map.height() != 0 || out_width % map.width() != 0) {
    throw UsageError("upsample_nearest: " + std::to_string(out_width) + "x" + std::to_string(out_height) +
                     " is not an integer multiple of " + std::to_string(map.width()) + "x" +
                     std::to_string(map.height()));
  }
  const int fy = out_height / map.height();
  const int fx = out_width / map.width();
  std::vector<float> v(static_cast<std::size_t>(out_height) * static_cast<std::size_t>(out_width));
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      v[static_cast<std::size_t>(y) * static_cast<std::size_t>(out_width) + static_cast<std::size_t>(x)] =
          map.at(x / fx, y / fy);
    }
  }
  return ProbMap(out_width, out_height, std::move(v));
}

}  // namespace attn
