#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masks/image.hpp"
#include "synthgen/manifest.hpp"
#include "tensor/rng.hpp"

namespace attn {

struct GenCounts {
  int real = 0;
  int partial_fake = 0;
  int entire_fake = 0;
};

struct GenConfig {
  int image_size = 64;
  GenCounts counts;
  double fingerprint_strength = 0.08;
  double area_min = 0.1;
  double area_max = 0.5;
  std::uint64_t seed = 7;

  /// Throws UsageError when a field is out of range.
  void validate() const;
};

struct GeneratedImage {
  RgbImage image;
  ManipMask mask;
  std::vector<float> base;  // smooth content before fingerprinting, H*W*3 in [0, 1]
};

/// Smooth sinusoid base plus a tiled 4x4 per-channel fingerprint.
GeneratedImage gen_real(Rng& rng, int size, double strength);

/// Replaces a random rectangle or ellipse of `source` with shifted content
/// carrying a fake-family fingerprint, box-blurred inside the region.
/// Pixels outside the region are copied from `source` unchanged.
GeneratedImage gen_partial_fake(const GeneratedImage& source, Rng& rng, const GenConfig& cfg);

/// Fresh base with a fake-family fingerprint everywhere.
GeneratedImage gen_entire_fake(Rng& rng, const GenConfig& cfg);

/// Writes images/, masks/ and manifest.jsonl under out_dir.
DatasetManifest gen_dataset(const GenConfig& cfg, const std::string& out_dir);

/// Mean over pixels and channels of |pixel - mean of its 2x2 block|, in [0, 1] units.
double block_difference_statistic(const RgbImage& img);

/// Per-image seeds, also recorded in the manifest.
std::uint64_t image_seed(std::uint64_t global_seed, Category category, std::uint64_t index);

}  // namespace attn
