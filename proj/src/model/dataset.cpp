#include "model/dataset.hpp"

#include <filesystem>

#include "common/errors.hpp"
#include "masks/masks.hpp"

namespace attn {

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == split) out.push_back(i);
  }
  return out;
}

Dataset load_dataset(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const DatasetManifest manifest = read_manifest(manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();
  Dataset ds;
  for (const auto& r : manifest.records) {
    Sample s;
    s.image_path = r.image_path;
    s.category = r.label;
    s.split = r.split;
    s.image = read_ppm((root / r.image_path).string());
    if (s.image.width != s.image.height) throw FormatError(r.image_path + ": image is not square");
    if (ds.image_size == 0) ds.image_size = s.image.width;
    if (s.image.width != ds.image_size) {
      throw FormatError(r.image_path + ": size " + std::to_string(s.image.width) + " differs from " +
                        std::to_string(ds.image_size));
    }
    const fs::path mask_path = root / r.mask_path;
    if (!r.mask_path.empty() && fs::exists(mask_path)) {
      s.mask = read_pgm(mask_path.string());
      if (s.mask->width() != s.image.width || s.mask->height() != s.image.height) {
        throw FormatError(r.mask_path + ": mask size does not match its image");
      }
    } else if (r.label == Category::Real) {
      s.mask = constant_mask(ConstantMaskKind::Real, s.image.width, s.image.height);
    } else if (r.label == Category::EntireFake) {
      s.mask = constant_mask(ConstantMaskKind::EntireFake, s.image.width, s.image.height);
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Tensor image_batch(const Dataset& ds, std::span<const std::size_t> indices) {
  const int S = ds.image_size;
  Tensor t({static_cast<int>(indices.size()), S, S, 3});
  float* out = t.ptr();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    for (std::uint8_t v : ds.samples[indices[k]].image.data) *out++ = static_cast<float>(v) / 255.0f;
  }
  return t;
}

}  // namespace attn
