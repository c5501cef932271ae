#include "mra/mae/random_mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mra/error.hpp"

namespace mra::mae {

int masked_patch_count(int num_patches, double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    fail(ErrorKind::validation, "mask ratio must lie in [0, 1)");
  }
  return static_cast<int>(std::lround(ratio * num_patches));
}

int visible_patch_count(int num_patches, double ratio) {
  return num_patches - masked_patch_count(num_patches, ratio);
}

TopKIndexSet sample_random_mask(int num_patches, double ratio, Rng& rng) {
  const int visible = visible_patch_count(num_patches, ratio);
  std::vector<int> order(static_cast<std::size_t>(num_patches));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(visible));
  return {std::move(order), visible, num_patches};
}

TopKIndexSet sample_random_mask(const PatchGeometry& geometry, double ratio, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_random_mask(geometry.num_patches(), ratio, rng);
}

}  // namespace mra::mae
