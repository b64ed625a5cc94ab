#pragma once

#include <cstdint>
#include <string>

#include "attention/mam_basis.hpp"

namespace attn {

/// Draws up to max_masks partial-fake masks from the train split (seeded
/// subset when there are more), downsamples them to map_size and fits the
/// basis. Needs at least n + 1 masks.
MamBasis fit_basis_from_manifest(const std::string& manifest_path, int n, int max_masks, int map_size,
                                 std::uint64_t seed);

}  // namespace attn
