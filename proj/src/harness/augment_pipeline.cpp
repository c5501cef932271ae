#include "mra/harness/augment_pipeline.hpp"

#include <cmath>
#include <random>

namespace mra::harness {

using augment::AugmentorKind;

Image random_crop_flip(const Image& image, int padding, bool flip, Rng& rng) {
  const int h = image.height();
  const int w = image.width();
  const int c = image.channels();
  int dy = 0;
  int dx = 0;
  if (padding > 0) {
    std::uniform_int_distribution<int> offset(0, 2 * padding);
    dy = offset(rng) - padding;
    dx = offset(rng) - padding;
  }
  const bool mirror = flip && uniform01(rng) < 0.5;
  Image out(h, w, c, 0.0f);
  for (int y = 0; y < h; ++y) {
    const int sy = y + dy;
    if (sy < 0 || sy >= h) continue;
    for (int x = 0; x < w; ++x) {
      const int sx = (mirror ? w - 1 - x : x) + dx;
      if (sx < 0 || sx >= w) continue;
      for (int ch = 0; ch < c; ++ch) out(y, x, ch) = image(sy, sx, ch);
    }
  }
  return out;
}

TrainingAugmentor::TrainingAugmentor(const AugmentConfig& settings, double pretrain_mask_ratio,
                                     std::shared_ptr<const mae::MaskedAutoencoder<float>> model)
    : settings_(settings) {
  if (augment::needs_autoencoder(settings.augmentor)) {
    if (!model) {
      fail(ErrorKind::config, "augmentor '" + std::string(augment::to_string(settings.augmentor)) +
                                  "' needs a pretrained autoencoder checkpoint");
    }
    handle_ = augment::AugmentorHandle::create(std::move(model), settings.strategy,
                                               settings.effective_mask_ratio(pretrain_mask_ratio),
                                               settings.apply_probability, settings.scoring);
  }
}

AugmentedBatch TrainingAugmentor::apply(std::span<const Image> images, std::span<const int> labels,
                                        std::uint64_t batch_seed) {
  if (images.size() != labels.size()) fail(ErrorKind::validation, "augment: images and labels differ in count");
  const std::size_t n = images.size();
  AugmentedBatch out;
  out.images.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(batch_seed, {1, i});
    switch (settings_.augmentor) {
      case AugmentorKind::cutout:
        out.images.push_back(augment::cutout(images[i], settings_.cutout_hole, rng));
        break;
      case AugmentorKind::mra:
      case AugmentorKind::mra_cutmix:
        out.images.push_back(augment::augment(images[i], *handle_, rng));
        ++calls_;
        break;
      case AugmentorKind::mra_mask_only:
        out.images.push_back(augment::mask_only(images[i], *handle_, rng));
        ++calls_;
        break;
      default:
        out.images.push_back(images[i]);
        break;
    }
    out.labels.push_back({labels[i], labels[i], 1.0});
  }
  if (!augment::mixes_pairs(settings_.augmentor) || n == 0) return out;

  Rng mix_rng = make_rng(batch_seed, {2});
  const bool blend = settings_.augmentor == AugmentorKind::mixup;
  const double alpha = blend ? settings_.mixup_alpha : settings_.cutmix_alpha;
  const double lam = sample_beta(mix_rng, alpha, alpha);
  const Image& first = out.images.front();
  augment::CutBox box;
  if (!blend) {
    std::uniform_int_distribution<int> cy(0, first.height() - 1);
    std::uniform_int_distribution<int> cx(0, first.width() - 1);
    const int center_y = cy(mix_rng);
    const int center_x = cx(mix_rng);
    box = augment::cutmix_box(first.height(), first.width(), lam, center_y, center_x);
  }
  AugmentedBatch mixed;
  mixed.images.reserve(n);
  mixed.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    augment::MixResult r =
        blend ? augment::mixup_with_lambda(out.images[i], labels[i], out.images[j], labels[j], lam)
              : augment::cutmix_with_box(out.images[i], labels[i], out.images[j], labels[j], box);
    mixed.images.push_back(std::move(r.image));
    mixed.labels.push_back(r.label);
  }
  return mixed;
}

}  // namespace mra::harness
