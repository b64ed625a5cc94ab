#include "model/mam_fit.hpp"

#include <algorithm>
#include <filesystem>

#include "common/errors.hpp"
#include "common/log.hpp"
#include "masks/masks.hpp"
#include "synthgen/manifest.hpp"
#include "tensor/rng.hpp"

namespace attn {

MamBasis fit_basis_from_manifest(const std::string& manifest_path, int n, int max_masks, int map_size,
                                 std::uint64_t seed) {
  if (n < 1) throw UsageError("the number of basis maps must be >= 1, got " + std::to_string(n));
  if (max_masks < n + 1) throw UsageError("at least n + 1 masks must be sampled");
  if (map_size < 1) throw UsageError("map size must be >= 1");
  const DatasetManifest manifest = read_manifest(manifest_path);
  const std::filesystem::path root = std::filesystem::path(manifest_path).parent_path();

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    if (r.label == Category::PartialFake && r.split == Split::Train) pool.push_back(i);
  }
  if (pool.size() < static_cast<std::size_t>(n) + 1) {
    throw UsageError("fitting " + std::to_string(n) + " basis maps needs at least " + std::to_string(n + 1) +
                     " partial-fake masks in the train split, found " + std::to_string(pool.size()));
  }
  if (pool.size() > static_cast<std::size_t>(max_masks)) {
    Rng(seed).derive(0x4d414d).shuffle(std::span<std::size_t>(pool));  // "MAM"
    pool.resize(static_cast<std::size_t>(max_masks));
    std::sort(pool.begin(), pool.end());
  }

  std::vector<Tensor> masks;
  for (std::size_t i : pool) {
    const auto& r = manifest.records[i];
    const ManipMask m = read_pgm((root / r.mask_path).string());
    masks.push_back(downsample_mask(m, map_size, map_size).to_tensor());
  }
  logger()->info("fitting {} basis maps from {} masks at {}x{}", n, masks.size(), map_size, map_size);
  return fit_mam_basis(masks, n);
}

}  // namespace attn
