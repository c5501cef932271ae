#include "mra/harness/occlusion.hpp"

#include <algorithm>

#include "mra/error.hpp"
#include "mra/harness/metrics.hpp"

namespace mra::harness {

namespace {
constexpr std::size_t kEvalChunk = 250;
}

Image occlude_outside_center(const Image& image, int hole_size) {
  const int side = std::min(image.height(), image.width());
  if (hole_size < 0 || hole_size > side) {
    fail(ErrorKind::validation, "occlusion hole size " + std::to_string(hole_size) + " outside [0, " +
                                    std::to_string(side) + "]");
  }
  Image out(image.height(), image.width(), image.channels(), 0.0f);
  const int top = (image.height() - hole_size) / 2;
  const int left = (image.width() - hole_size) / 2;
  for (int y = top; y < top + hole_size; ++y) {
    for (int x = left; x < left + hole_size; ++x) {
      for (int c = 0; c < image.channels(); ++c) out(y, x, c) = image(y, x, c);
    }
  }
  return out;
}

double evaluate_accuracy(const classify::ResNetMini<float>& model, std::span<const Image> images,
                         std::span<const int> labels) {
  if (images.size() != labels.size()) fail(ErrorKind::validation, "evaluate: images and labels differ in count");
  if (images.empty()) fail(ErrorKind::validation, "evaluate: empty split");
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < images.size(); begin += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, images.size() - begin);
    const std::vector<int> predicted = model.predict(images.subspan(begin, count));
    for (std::size_t i = 0; i < count; ++i) correct += predicted[i] == labels[begin + i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(images.size());
}

std::vector<int> resolve_hole_sizes(const std::vector<int>& configured, int side) {
  if (!configured.empty()) return configured;
  std::vector<int> sizes;
  for (int i = 0; i <= 8; ++i) sizes.push_back((i * side + 4) / 8);
  return sizes;
}

OcclusionCurve evaluate_occlusion(const classify::ResNetMini<float>& model, const io::LabeledImages& eval,
                                  const std::vector<int>& hole_sizes) {
  if (eval.images.empty()) fail(ErrorKind::validation, "occlusion: empty eval split");
  const int side = std::min(eval.images.front().height(), eval.images.front().width());
  for (int s : hole_sizes) {
    if (s < 0 || s > side) {
      fail(ErrorKind::validation, "occlusion hole size " + std::to_string(s) + " outside [0, " +
                                      std::to_string(side) + "]");
    }
  }
  OcclusionCurve curve;
  ImageBatch occluded(eval.images.size());
  for (int s : hole_sizes) {
    for (std::size_t i = 0; i < eval.images.size(); ++i) occluded[i] = occlude_outside_center(eval.images[i], s);
    const double accuracy = evaluate_accuracy(model, occluded, eval.labels);
    curve.push_back({s, 1.0 - accuracy, accuracy});
  }
  return curve;
}

std::string occlusion_to_csv(const OcclusionCurve& curve) {
  std::string out = "hole_size,error,accuracy\n";
  for (const auto& p : curve) {
    out += std::to_string(p.hole_size) + "," + format_number(p.error) + "," + format_number(p.accuracy) + "\n";
  }
  return out;
}

}  // namespace mra::harness
