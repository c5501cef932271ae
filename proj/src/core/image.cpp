#include "mra/image.hpp"

#include <cstring>

#include "mra/error.hpp"

namespace mra {

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) {
    fail(ErrorKind::geometry, "image dimensions must be non-negative");
  }
  pixels_ = Eigen::VectorXf::Constant(
      static_cast<Eigen::Index>(height) * width * channels, fill);
}

bool Image::all_finite() const { return pixels_.allFinite(); }

bool Image::in_unit_range() const {
  if (!all_finite()) return false;
  return pixels_.size() == 0 ||
         (pixels_.minCoeff() >= 0.0f && pixels_.maxCoeff() <= 1.0f);
}

void Image::clamp_unit() { pixels_ = pixels_.cwiseMax(0.0f).cwiseMin(1.0f); }

double Image::mean() const {
  if (pixels_.size() == 0) return 0.0;
  return pixels_.cast<double>().mean();
}

bool operator==(const Image& a, const Image& b) {
  if (!a.same_shape(b)) return false;
  return a.pixels_.size() == 0 ||
         std::memcmp(a.pixels_.data(), b.pixels_.data(),
                     sizeof(float) * static_cast<std::size_t>(a.pixels_.size())) == 0;
}

}  // namespace mra
