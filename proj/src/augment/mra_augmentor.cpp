#include "mra/augment/mra_augmentor.hpp"

#include "mra/hash.hpp"

namespace mra::augment {

AugmentorHandle AugmentorHandle::create(
    std::shared_ptr<const mae::MaskedAutoencoder<float>> model, masking::MaskStrategy strategy,
    double mask_ratio, double apply_probability, masking::ScoreOptions scoring) {
  if (!model) fail(ErrorKind::validation, "augmentor needs a model");
  AugmentorHandle handle;
  handle.keep_count = masking::keep_count_for_ratio(model->geometry().num_patches(), mask_ratio);
  handle.model = std::move(model);
  handle.strategy = strategy;
  handle.scoring = scoring;
  handle.apply_probability = apply_probability;
  handle.validate();
  return handle;
}

void AugmentorHandle::validate() const {
  if (!model) fail(ErrorKind::validation, "augmentor needs a model");
  if (!(apply_probability >= 0.0 && apply_probability <= 1.0)) {
    fail(ErrorKind::validation, "apply probability must lie in [0, 1]");
  }
  masking::MaskingPolicy{strategy, keep_count, 0}.validate(geometry().num_patches());
}

std::string AugmentorHandle::parameter_digest() const {
  return mra::parameter_digest<float>(model->parameters());
}

namespace {

void check_input(const Image& image, const AugmentorHandle& handle) {
  const auto& g = handle.geometry();
  if (image.height() != g.height() || image.width() != g.width() ||
      image.channels() != g.channels()) {
    fail(ErrorKind::validation, "augment: image " + std::to_string(image.height()) + "x" +
                                    std::to_string(image.width()) + "x" +
                                    std::to_string(image.channels()) +
                                    " does not match the augmentor geometry");
  }
}

struct Draw {
  bool apply = false;
  std::uint64_t seed = 0;
};

Draw draw(const AugmentorHandle& handle, Rng& rng) {
  Draw d;
  d.apply = uniform01(rng) < handle.apply_probability;
  d.seed = rng();
  return d;
}

Image reconstruct(const Image& image, const AugmentorHandle& handle, std::uint64_t seed) {
  const TopKIndexSet keep = select_patches(image, handle, seed);
  return handle.model->reconstruct(image, keep);
}

Image masked(const Image& image, const AugmentorHandle& handle, std::uint64_t seed) {
  const TopKIndexSet keep = select_patches(image, handle, seed);
  return apply_mask(image, mask_from_indices(keep, handle.geometry()));
}

}  // namespace

masking::AttentionScores score_patches(const Image& image, const AugmentorHandle& handle) {
  check_input(image, handle);
  const auto full = TopKIndexSet::all(handle.geometry().num_patches());
  const auto encoded = handle.model->encode_visible(image, full);
  return masking::class_token_scores(encoded.attention, handle.scoring);
}

TopKIndexSet select_patches(const Image& image, const AugmentorHandle& handle,
                            std::uint64_t seed) {
  check_input(image, handle);
  const masking::MaskingPolicy policy{handle.strategy, handle.keep_count, seed};
  if (handle.strategy == masking::MaskStrategy::random) {
    masking::AttentionScores flat;
    flat.scores = Eigen::VectorXd::Zero(handle.geometry().num_patches());
    return masking::select_visible(flat, policy);
  }
  return masking::select_visible(score_patches(image, handle), policy);
}

Image augment(const Image& image, const AugmentorHandle& handle, Rng& rng) {
  check_input(image, handle);
  const Draw d = draw(handle, rng);
  if (!d.apply) return image;
  return reconstruct(image, handle, d.seed);
}

Image mask_only(const Image& image, const AugmentorHandle& handle, Rng& rng) {
  check_input(image, handle);
  const Draw d = draw(handle, rng);
  if (!d.apply) return image;
  return masked(image, handle, d.seed);
}

ImageBatch augment_batch(std::span<const Image> batch, const AugmentorHandle& handle,
                         std::uint64_t base_seed) {
  ImageBatch out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng rng = make_rng(base_seed, {static_cast<std::uint64_t>(i)});
    out.push_back(augment(batch[i], handle, rng));
  }
  return out;
}

ImageBatch augment_batch(std::span<const Image> batch, const AugmentorHandle& handle, Rng& rng) {
  return augment_batch(batch, handle, rng());
}

Image augmentation_grid(std::span<const Image> images, const AugmentorHandle& handle,
                        std::uint64_t seed) {
  const auto& g = handle.geometry();
  const int h = g.height();
  const int w = g.width();
  Image grid(h * static_cast<int>(images.size()), 3 * w, g.channels());
  for (std::size_t row = 0; row < images.size(); ++row) {
    check_input(images[row], handle);
    const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(row)});
    const Image tiles[3] = {images[row], masked(images[row], handle, s),
                            reconstruct(images[row], handle, s)};
    for (int t = 0; t < 3; ++t) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          for (int c = 0; c < g.channels(); ++c) {
            grid(static_cast<int>(row) * h + y, t * w + x, c) = tiles[t](y, x, c);
          }
        }
      }
    }
  }
  return grid;
}

}  // namespace mra::augment
