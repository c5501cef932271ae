#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mra/augment/baseline_augs.hpp"
#include "mra/augment/mra_augmentor.hpp"
#include "mra/augment/registry.hpp"
#include "mra/harness/run_config.hpp"

namespace mra::harness {

struct AugmentedBatch {
  ImageBatch images;
  std::vector<augment::MixedLabel> labels;
};

/// Zero-pads by `padding`, takes a random crop of the original size, then
/// mirrors horizontally with probability 1/2 when `flip` is set.
Image random_crop_flip(const Image& image, int padding, bool flip, Rng& rng);

/// The augmentation stage of the training loop for one registry entry.
/// Sample i of a batch draws from (batch_seed, i); mixing arms draw one
/// lambda per batch and pair sample i with sample n-1-i.
class TrainingAugmentor {
 public:
  TrainingAugmentor(const AugmentConfig& settings, double pretrain_mask_ratio,
                    std::shared_ptr<const mae::MaskedAutoencoder<float>> model);

  augment::AugmentorKind kind() const { return settings_.augmentor; }
  const std::optional<augment::AugmentorHandle>& handle() const { return handle_; }
  std::int64_t calls() const { return calls_; }

  AugmentedBatch apply(std::span<const Image> images, std::span<const int> labels, std::uint64_t batch_seed);

 private:
  AugmentConfig settings_;
  std::optional<augment::AugmentorHandle> handle_;
  std::int64_t calls_ = 0;
};

}  // namespace mra::harness
