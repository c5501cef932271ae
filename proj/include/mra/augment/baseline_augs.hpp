#pragma once

#include "mra/image.hpp"
#include "mra/random.hpp"

namespace mra::augment {

/// Two-label target with weight lam on label_a and 1 - lam on label_b.
struct MixedLabel {
  int label_a = 0;
  int label_b = 0;
  double lam = 1.0;

  double weight_a() const { return lam; }
  double weight_b() const { return 1.0 - lam; }
};

struct MixResult {
  Image image;
  MixedLabel label;
};

/// Half-open pixel box.
struct CutBox {
  int y0 = 0;
  int y1 = 0;
  int x0 = 0;
  int x1 = 0;

  int area() const { return (y1 - y0) * (x1 - x0); }
};

/// Zeroes a hole_size square centered uniformly at random, clipped at the
/// borders.
Image cutout(const Image& image, int hole_size, Rng& rng);
Image cutout_at(const Image& image, int hole_size, int center_y, int center_x);

MixResult mixup(const Image& a, int label_a, const Image& b, int label_b, double alpha, Rng& rng);
MixResult mixup_with_lambda(const Image& a, int label_a, const Image& b, int label_b, double lam);

/// Box with side fractions sqrt(1 - lam), centered at (center_y, center_x),
/// clipped to the image.
CutBox cutmix_box(int height, int width, double lam, int center_y, int center_x);

MixResult cutmix(const Image& a, int label_a, const Image& b, int label_b, double alpha, Rng& rng);
MixResult cutmix_with_lambda(const Image& a, int label_a, const Image& b, int label_b, double lam,
                             Rng& rng);
/// Pastes `box` from b into a; lam becomes 1 - box area / (H * W).
MixResult cutmix_with_box(const Image& a, int label_a, const Image& b, int label_b,
                          const CutBox& box);

}  // namespace mra::augment
