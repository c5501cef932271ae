#include "mra/augment/baseline_augs.hpp"

#include <algorithm>
#include <cmath>

#include "mra/error.hpp"

namespace mra::augment {

namespace {

void check_pair(const Image& a, const Image& b) {
  if (!a.same_shape(b)) fail(ErrorKind::validation, "mixing images of different shapes");
}

void check_lambda(double lam) {
  if (!(lam >= 0.0 && lam <= 1.0)) fail(ErrorKind::validation, "mixing weight outside [0, 1]");
}

}  // namespace

Image cutout_at(const Image& image, int hole_size, int center_y, int center_x) {
  if (hole_size < 0) fail(ErrorKind::validation, "cutout hole size must be non-negative");
  if (hole_size > std::min(image.height(), image.width())) {
    fail(ErrorKind::validation, "cutout hole larger than the image");
  }
  Image out = image;
  const int y0 = std::clamp(center_y - hole_size / 2, 0, image.height());
  const int y1 = std::clamp(center_y - hole_size / 2 + hole_size, 0, image.height());
  const int x0 = std::clamp(center_x - hole_size / 2, 0, image.width());
  const int x1 = std::clamp(center_x - hole_size / 2 + hole_size, 0, image.width());
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < image.channels(); ++c) out(y, x, c) = 0.0f;
    }
  }
  return out;
}

Image cutout(const Image& image, int hole_size, Rng& rng) {
  if (hole_size < 0) fail(ErrorKind::validation, "cutout hole size must be non-negative");
  const int cy = std::uniform_int_distribution<int>(0, image.height() - 1)(rng);
  const int cx = std::uniform_int_distribution<int>(0, image.width() - 1)(rng);
  return cutout_at(image, hole_size, cy, cx);
}

MixResult mixup_with_lambda(const Image& a, int label_a, const Image& b, int label_b, double lam) {
  check_pair(a, b);
  check_lambda(lam);
  MixResult out{a, {label_a, label_b, lam}};
  out.image.pixels() = (lam * a.pixels().cast<double>() + (1.0 - lam) * b.pixels().cast<double>())
                           .cast<float>();
  out.image.clamp_unit();
  return out;
}

MixResult mixup(const Image& a, int label_a, const Image& b, int label_b, double alpha, Rng& rng) {
  check_pair(a, b);
  return mixup_with_lambda(a, label_a, b, label_b, sample_beta(rng, alpha, alpha));
}

CutBox cutmix_box(int height, int width, double lam, int center_y, int center_x) {
  check_lambda(lam);
  const double cut = std::sqrt(1.0 - lam);
  const int cut_h = static_cast<int>(height * cut);
  const int cut_w = static_cast<int>(width * cut);
  CutBox box;
  box.y0 = std::clamp(center_y - cut_h / 2, 0, height);
  box.y1 = std::clamp(center_y + cut_h / 2, 0, height);
  box.x0 = std::clamp(center_x - cut_w / 2, 0, width);
  box.x1 = std::clamp(center_x + cut_w / 2, 0, width);
  return box;
}

MixResult cutmix_with_box(const Image& a, int label_a, const Image& b, int label_b,
                          const CutBox& box) {
  check_pair(a, b);
  if (box.y0 < 0 || box.x0 < 0 || box.y1 > a.height() || box.x1 > a.width() || box.y0 > box.y1 ||
      box.x0 > box.x1) {
    fail(ErrorKind::validation, "cutmix box outside the image");
  }
  MixResult out{a, {label_a, label_b, 1.0}};
  for (int y = box.y0; y < box.y1; ++y) {
    for (int x = box.x0; x < box.x1; ++x) {
      for (int c = 0; c < a.channels(); ++c) out.image(y, x, c) = b(y, x, c);
    }
  }
  out.label.lam = 1.0 - double(box.area()) / (double(a.height()) * a.width());
  return out;
}

MixResult cutmix_with_lambda(const Image& a, int label_a, const Image& b, int label_b, double lam,
                             Rng& rng) {
  check_pair(a, b);
  const int cy = std::uniform_int_distribution<int>(0, a.height() - 1)(rng);
  const int cx = std::uniform_int_distribution<int>(0, a.width() - 1)(rng);
  return cutmix_with_box(a, label_a, b, label_b, cutmix_box(a.height(), a.width(), lam, cy, cx));
}

MixResult cutmix(const Image& a, int label_a, const Image& b, int label_b, double alpha, Rng& rng) {
  check_pair(a, b);
  const double lam = sample_beta(rng, alpha, alpha);
  return cutmix_with_lambda(a, label_a, b, label_b, lam, rng);
}

}  // namespace mra::augment
