#include <doctest.h>

#include <algorithm>
#include <memory>
#include <numeric>

#include "mra/augment/mra_augmentor.hpp"
#include "mra/io/dataset.hpp"
#include "mra/mae/pretrain.hpp"
#include "mra/patches.hpp"
#include "support/helpers.hpp"

using namespace mra;
using augment::AugmentorHandle;
using masking::MaskStrategy;

namespace {

constexpr int kSide = 16;

const io::Dataset& gradients() {
  static const io::Dataset data = io::load_dataset("synthetic:gradients", {800, 100, kSide, 0});
  return data;
}

// Tiny autoencoder pretrained once for the whole file.
std::shared_ptr<const mae::MaskedAutoencoder<float>> trained_model() {
  static const std::shared_ptr<const mae::MaskedAutoencoder<float>> model = [] {
    mae::MaeConfig config = mae::mae_preset("mae-tiny-test");
    config.image_size = kSide;
    auto m = std::make_shared<mae::MaskedAutoencoder<float>>(config);
    Rng rng = make_rng(3);
    m->init(rng);
    nn::Optimizer<float> opt({.kind = nn::OptimizerKind::adamw, .learning_rate = 2e-3, .weight_decay = 0.05,
                              .beta1 = 0.9, .beta2 = 0.95});
    const auto& train = gradients().train.images;
    for (int step = 0; step < 400; ++step) {
      const std::size_t begin = static_cast<std::size_t>(step * 16) % train.size();
      mae::pretrain_step(*m, opt, std::span<const Image>(train).subspan(begin, 16), rng);
    }
    return m;
  }();
  return model;
}

AugmentorHandle handle(MaskStrategy strategy, double ratio = 0.4, double p = 1.0) {
  return AugmentorHandle::create(trained_model(), strategy, ratio, p);
}

double mse(const Image& a, const Image& b) { return (a.pixels() - b.pixels()).squaredNorm() / double(a.size()); }

Image strictly_positive_image(Rng& rng) {
  Image img = test::random_image(rng, kSide, kSide, 3);
  img.pixels() = img.pixels().array() * 0.9f + 0.05f;
  return img;
}

}  // namespace

TEST_CASE("augment keeps shape and range and is deterministic") {
  const AugmentorHandle h = handle(MaskStrategy::mask_low);
  for (int i = 0; i < 5; ++i) {
    const Image& x = gradients().eval.images[i];
    Rng a = make_rng(10, {std::uint64_t(i)});
    Rng b = make_rng(10, {std::uint64_t(i)});
    const Image y1 = augment::augment(x, h, a);
    const Image y2 = augment::augment(x, h, b);
    CHECK(y1.same_shape(x));
    CHECK(y1.in_unit_range());
    CHECK(y1 == y2);
  }
}

TEST_CASE("apply probability zero is the identity") {
  const AugmentorHandle h = handle(MaskStrategy::mask_low, 0.4, 0.0);
  Rng rng = make_rng(4);
  for (int i = 0; i < 5; ++i) {
    const Image& x = gradients().eval.images[i];
    CHECK(augment::augment(x, h, rng) == x);
    CHECK(augment::mask_only(x, h, rng) == x);
  }
  CHECK_ERROR_KIND(handle(MaskStrategy::mask_low, 0.4, 1.5), ErrorKind::validation);
}

TEST_CASE("reconstruction error sits between zero and the channel-mean baseline") {
  const auto& data = gradients();
  Eigen::Vector3d channel_mean = Eigen::Vector3d::Zero();
  double count = 0.0;
  for (const auto& img : data.train.images) {
    for (Eigen::Index i = 0; i < img.pixels().size(); ++i) channel_mean(i % 3) += img.pixels()[i];
    count += img.pixels().size() / 3.0;
  }
  channel_mean /= count;

  const AugmentorHandle h = handle(MaskStrategy::mask_low);
  double reconstruction = 0.0;
  double baseline = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Image& x = data.eval.images[i];
    Image mean_image(kSide, kSide, 3);
    for (Eigen::Index k = 0; k < mean_image.pixels().size(); ++k) {
      mean_image.pixels()[k] = static_cast<float>(channel_mean(k % 3));
    }
    Rng rng = make_rng(20, {std::uint64_t(i)});
    reconstruction += mse(augment::augment(x, h, rng), x);
    baseline += mse(mean_image, x);
  }
  MESSAGE("reconstruction mse " << reconstruction / 100 << " channel-mean mse " << baseline / 100);
  CHECK(reconstruction > 0.0);
  CHECK(reconstruction < baseline);
}

TEST_CASE("augmenting never changes the frozen parameters") {
  const AugmentorHandle h = handle(MaskStrategy::random);
  const std::string before = h.parameter_digest();
  Rng rng = make_rng(5);
  for (int i = 0; i < 200; ++i) {
    (void)augment::augment(gradients().train.images[static_cast<std::size_t>(i)], h, rng);
  }
  CHECK(h.parameter_digest() == before);
}

TEST_CASE("geometry mismatch is a validation error") {
  const AugmentorHandle h = handle(MaskStrategy::mask_low);
  Rng rng = make_rng(6);
  const Image wrong = test::random_image(rng, kSide + 4, kSide, 3);
  CHECK_ERROR_KIND(augment::augment(wrong, h, rng), ErrorKind::validation);
  CHECK_ERROR_KIND(augment::mask_only(test::random_image(rng, kSide, kSide, 1), h, rng), ErrorKind::validation);
}

TEST_CASE("mask_low and mask_high disagree when scores are distinct") {
  const AugmentorHandle low = handle(MaskStrategy::mask_low);
  const AugmentorHandle high = handle(MaskStrategy::mask_high);
  for (int i = 0; i < 5; ++i) {
    const Image& x = gradients().eval.images[i];
    const auto scores = augment::score_patches(x, low);
    std::vector<double> sorted(scores.scores.data(), scores.scores.data() + scores.scores.size());
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    Rng a = make_rng(7, {std::uint64_t(i)});
    Rng b = make_rng(7, {std::uint64_t(i)});
    CHECK_FALSE(augment::augment(x, low, a) == augment::augment(x, high, b));
  }
}

TEST_CASE("mask_only composes select, mask_from_indices and apply_mask") {
  Rng images = make_rng(8);
  for (MaskStrategy strategy : {MaskStrategy::mask_low, MaskStrategy::mask_high}) {
    const AugmentorHandle h = handle(strategy);
    const auto& g = h.geometry();
    for (int i = 0; i < 5; ++i) {
      const Image x = strictly_positive_image(images);
      Rng rng = make_rng(9, {std::uint64_t(i)});
      const Image y = augment::mask_only(x, h, rng);
      const TopKIndexSet keep = augment::select_patches(x, h, 0);
      CHECK(y == apply_mask(x, mask_from_indices(keep, g)));
      const auto zeros = (y.pixels().array() == 0.0f).count();
      const int n = g.num_patches();
      CHECK(zeros == (n - h.keep_count) * g.patch_size() * g.patch_size() * g.channels());
    }
  }
}

TEST_CASE("mask_only with every patch kept is the identity") {
  const AugmentorHandle h = handle(MaskStrategy::mask_low, 0.0);
  CHECK(h.keep_count == h.geometry().num_patches());
  Rng rng = make_rng(11);
  const Image x = strictly_positive_image(rng);
  CHECK(augment::mask_only(x, h, rng) == x);
}

TEST_CASE("augment_batch contracts") {
  const AugmentorHandle h = handle(MaskStrategy::mask_low);
  const auto& eval = gradients().eval.images;
  CHECK(augment::augment_batch(std::span<const Image>(), h, 1).empty());

  Rng single = make_rng(12, {0});
  const ImageBatch one = augment::augment_batch(std::span<const Image>(eval).first(1), h, 12);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == augment::augment(eval[0], h, single));

  std::vector<std::size_t> perm(6);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[1], perm[4]);
  ImageBatch batch(eval.begin(), eval.begin() + 6);
  ImageBatch permuted;
  for (auto p : perm) permuted.push_back(batch[p]);
  const ImageBatch augmented = augment::augment_batch(batch, h, 13);
  const ImageBatch augmented_permuted = augment::augment_batch(permuted, h, 13);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(augmented_permuted[i] == augmented[perm[i]]);
}
