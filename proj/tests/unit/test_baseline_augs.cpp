#include <doctest.h>

#include <algorithm>

#include "mra/augment/baseline_augs.hpp"
#include "mra/augment/registry.hpp"
#include "support/helpers.hpp"

using namespace mra;
using namespace mra::augment;

namespace {

// Pixels strictly inside (0, 1] so zeroed positions are unambiguous.
Image positive_image(Rng& rng, int h, int w, int c) {
  Image img = test::random_image(rng, h, w, c);
  img.pixels() = (img.pixels().array() * 0.9f + 0.1f).matrix();
  return img;
}

int zeroed_positions(const Image& img, int channel) {
  int count = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) count += img(y, x, channel) == 0.0f;
  return count;
}

int overlap(int lo, int hi, int size) { return std::max(0, std::min(hi, size) - std::max(lo, 0)); }

}  // namespace

TEST_CASE("cutout examples") {
  Rng rng = make_rng(1);
  const Image img = positive_image(rng, 16, 16, 3);
  CHECK(cutout(img, 0, rng) == img);
  CHECK(cutout_at(img, 16, 8, 8).pixels().isZero(0.0f));
  const Image interior = cutout_at(img, 6, 8, 7);
  for (int c = 0; c < 3; ++c) CHECK(zeroed_positions(interior, c) == 36);
  CHECK_ERROR_KIND(cutout(img, -1, rng), ErrorKind::validation);
  CHECK_ERROR_KIND(cutout_at(img, 17, 8, 8), ErrorKind::validation);
}

TEST_CASE("cutout area with border clipping") {
  Rng rng = make_rng(2);
  const Image img = positive_image(rng, 12, 10, 2);
  for (int trial = 0; trial < 300; ++trial) {
    const int s = std::uniform_int_distribution<int>(0, 10)(rng);
    const int cy = std::uniform_int_distribution<int>(0, 11)(rng);
    const int cx = std::uniform_int_distribution<int>(0, 9)(rng);
    const Image out = cutout_at(img, s, cy, cx);
    const int top = cy - s / 2;
    const int left = cx - s / 2;
    const int expected = overlap(top, top + s, 12) * overlap(left, left + s, 10);
    for (int c = 0; c < 2; ++c) CHECK(zeroed_positions(out, c) == expected);
    CHECK(out.in_unit_range());
  }
}

TEST_CASE("mixup examples") {
  Rng rng = make_rng(3);
  const Image a = test::random_image(rng, 8, 8, 3);
  const Image b = test::random_image(rng, 8, 8, 3);
  const auto one = mixup_with_lambda(a, 1, b, 2, 1.0);
  CHECK(one.image == a);
  CHECK(one.label.weight_a() == 1.0);
  CHECK(one.label.weight_b() == 0.0);

  const auto half = mixup_with_lambda(Image(4, 4, 1, 0.0f), 0, Image(4, 4, 1, 1.0f), 1, 0.5);
  CHECK((half.image.pixels().array() == 0.5f).all());

  for (int trial = 0; trial < 50; ++trial) {
    const auto m = mixup(a, 0, b, 1, 0.2, rng);
    CHECK(m.label.lam >= 0.0);
    CHECK(m.label.lam <= 1.0);
    CHECK(m.label.weight_a() + m.label.weight_b() == doctest::Approx(1.0));
    CHECK(std::abs(m.image.mean() - (m.label.lam * a.mean() + (1 - m.label.lam) * b.mean())) < 1e-6);
    CHECK(m.image.in_unit_range());
  }
  CHECK_ERROR_KIND(mixup(a, 0, Image(4, 4, 3), 1, 0.2, rng), ErrorKind::validation);
}

TEST_CASE("cutmix examples") {
  Rng rng = make_rng(4);
  const Image a = positive_image(rng, 8, 8, 3);
  const Image b = positive_image(rng, 8, 8, 3);
  const auto same = cutmix_with_lambda(a, 0, b, 1, 1.0, rng);
  CHECK(same.image == a);
  CHECK(same.label.lam == 1.0);
  const auto full = cutmix_with_box(a, 0, b, 1, CutBox{0, 8, 0, 8});
  CHECK(full.image == b);
  CHECK(full.label.lam == 0.0);
  CHECK_ERROR_KIND(cutmix(a, 0, Image(8, 8, 1), 1, 1.0, rng), ErrorKind::validation);
  CHECK_ERROR_KIND(cutmix_with_box(a, 0, b, 1, CutBox{0, 9, 0, 8}), ErrorKind::validation);
}

TEST_CASE("cutmix lambda matches the pasted pixel count") {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Image a = positive_image(rng, 12, 16, 2);
    Image b = a;
    b.pixels() = (1.1f - a.pixels().array()).matrix();  // differs from a everywhere
    const auto m = cutmix(a, 3, b, 7, 1.0, rng);
    int from_b = 0;
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 16; ++x) {
        const bool is_a = m.image(y, x, 0) == a(y, x, 0) && m.image(y, x, 1) == a(y, x, 1);
        const bool is_b = m.image(y, x, 0) == b(y, x, 0) && m.image(y, x, 1) == b(y, x, 1);
        CHECK((is_a || is_b));
        from_b += is_b;
      }
    CHECK(m.label.lam == 1.0 - from_b / (12.0 * 16.0));
    CHECK(m.label.label_a == 3);
    CHECK(m.label.label_b == 7);
  }
}

TEST_CASE("cutmix box geometry") {
  const CutBox centered = cutmix_box(32, 32, 0.75, 16, 16);
  CHECK(centered.area() == 256);
  const CutBox corner = cutmix_box(32, 32, 0.75, 0, 0);
  CHECK(corner.y0 == 0);
  CHECK(corner.area() == 64);
}

TEST_CASE("registry names") {
  const std::vector<std::string> expected = {"none", "cutout", "mixup", "cutmix",
                                             "mra", "mra_mask_only", "mra+cutmix"};
  CHECK(augmentor_names() == expected);
  for (const auto& name : expected) CHECK(to_string(parse_augmentor_kind(name)) == name);
  CHECK(needs_autoencoder(AugmentorKind::mra_cutmix));
  CHECK_FALSE(needs_autoencoder(AugmentorKind::cutout));
  CHECK(mixes_pairs(AugmentorKind::mixup));
  CHECK_FALSE(mixes_pairs(AugmentorKind::mra));
  CHECK_ERROR_KIND(parse_augmentor_kind("autoaugment"), ErrorKind::config);
}
