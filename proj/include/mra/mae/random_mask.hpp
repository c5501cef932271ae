#pragma once

#include <cstdint>

#include "mra/patches.hpp"
#include "mra/random.hpp"

namespace mra::mae {

/// round(ratio * N) with halves rounded away from zero.
int masked_patch_count(int num_patches, double ratio);
int visible_patch_count(int num_patches, double ratio);

/// Uniform subset of N - round(ratio * N) visible patches, without replacement.
TopKIndexSet sample_random_mask(int num_patches, double ratio, Rng& rng);
TopKIndexSet sample_random_mask(const PatchGeometry& geometry, double ratio, std::uint64_t seed);

}  // namespace mra::mae
