#pragma once

#include <span>
#include <string>
#include <vector>

#include "mra/classify/resnet_mini.hpp"
#include "mra/image.hpp"
#include "mra/io/dataset.hpp"

namespace mra::harness {

/// Keeps the centered s x s window (top-left at ((H-s)/2, (W-s)/2)) and
/// zeroes everything else. s = side is the identity, s = 0 blanks the image.
Image occlude_outside_center(const Image& image, int hole_size);

struct OcclusionPoint {
  int hole_size = 0;
  double error = 0.0;
  double accuracy = 0.0;
};

using OcclusionCurve = std::vector<OcclusionPoint>;

/// Top-1 accuracy with a fixed evaluation chunking, so equal inputs always
/// give equal predictions.
double evaluate_accuracy(const classify::ResNetMini<float>& model, std::span<const Image> images,
                         std::span<const int> labels);

/// Nine evenly spaced sizes from 0 to `side` when none are configured.
std::vector<int> resolve_hole_sizes(const std::vector<int>& configured, int side);

OcclusionCurve evaluate_occlusion(const classify::ResNetMini<float>& model, const io::LabeledImages& eval,
                                  const std::vector<int>& hole_sizes);

std::string occlusion_to_csv(const OcclusionCurve& curve);

}  // namespace mra::harness
