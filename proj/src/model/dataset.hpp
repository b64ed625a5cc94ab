#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "masks/image.hpp"
#include "synthgen/manifest.hpp"
#include "tensor/tensor.hpp"

namespace attn {

struct Sample {
  std::string image_path;  // as written in the manifest
  Category category = Category::Real;
  Split split = Split::Train;
  RgbImage image;
  /// Ground-truth map. Real and entire-fake records fall back to the constant
  /// masks when the file is missing; partial fakes stay empty.
  std::optional<ManipMask> mask;
  int label() const { return binary_label(category); }
};

struct Dataset {
  int image_size = 0;
  std::vector<Sample> samples;

  std::vector<std::size_t> indices(Split split) const;
};

/// Loads every record of the manifest into memory. All images must be square
/// and share one size.
Dataset load_dataset(const std::string& manifest_path);

/// N x S x S x 3 tensor in [0, 1] for the given samples.
Tensor image_batch(const Dataset& ds, std::span<const std::size_t> indices);

}  // namespace attn
