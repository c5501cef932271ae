#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "mra/image.hpp"
#include "mra/mae/masked_autoencoder.hpp"
#include "mra/masking/attention_masking.hpp"
#include "mra/random.hpp"

namespace mra::augment {

/// Frozen autoencoder plus the masking policy used to augment with it.
/// The model is held through a pointer-to-const; nothing here can update it.
struct AugmentorHandle {
  std::shared_ptr<const mae::MaskedAutoencoder<float>> model;
  masking::MaskStrategy strategy = masking::MaskStrategy::mask_low;
  int keep_count = 1;
  masking::ScoreOptions scoring;
  double apply_probability = 1.0;

  /// keep_count is derived from the augmentation mask ratio as
  /// N - round(ratio * N).
  static AugmentorHandle create(std::shared_ptr<const mae::MaskedAutoencoder<float>> model,
                                masking::MaskStrategy strategy, double mask_ratio,
                                double apply_probability = 1.0,
                                masking::ScoreOptions scoring = {});

  const mae::MaeConfig& config() const { return model->config(); }
  const PatchGeometry& geometry() const { return model->geometry(); }
  void validate() const;
  std::string parameter_digest() const;
};

/// Class-token scores from a full-visibility encoder pass.
masking::AttentionScores score_patches(const Image& image, const AugmentorHandle& handle);

/// Visible set for one image. `seed` only matters for the random strategy.
TopKIndexSet select_patches(const Image& image, const AugmentorHandle& handle,
                            std::uint64_t seed);

/// With probability apply_probability: score, mask, encode the kept
/// patches, decode and clamp. Otherwise returns the input unchanged.
Image augment(const Image& image, const AugmentorHandle& handle, Rng& rng);

/// Same draws as augment, but returns the masked image without
/// reconstruction.
Image mask_only(const Image& image, const AugmentorHandle& handle, Rng& rng);

/// Sample i uses its own stream derived from (base_seed, i).
ImageBatch augment_batch(std::span<const Image> batch, const AugmentorHandle& handle,
                         std::uint64_t base_seed);
ImageBatch augment_batch(std::span<const Image> batch, const AugmentorHandle& handle, Rng& rng);

/// Rows of (original | masked | reconstructed) tiles, one row per image,
/// masking always applied.
Image augmentation_grid(std::span<const Image> images, const AugmentorHandle& handle,
                        std::uint64_t seed);

}  // namespace mra::augment
