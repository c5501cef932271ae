#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace mra {

/// Dense H x W x C image, interleaved (HWC) storage, values in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(pixels_.size()); }
  bool empty() const noexcept { return pixels_.size() == 0; }

  float& operator()(int y, int x, int c) { return pixels_[index(y, x, c)]; }
  float operator()(int y, int x, int c) const { return pixels_[index(y, x, c)]; }

  Eigen::VectorXf& pixels() noexcept { return pixels_; }
  const Eigen::VectorXf& pixels() const noexcept { return pixels_; }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  bool all_finite() const;
  bool in_unit_range() const;
  void clamp_unit();
  double mean() const;

  // Bitwise comparison: shape plus the exact float representations.
  friend bool operator==(const Image& a, const Image& b);

 private:
  Eigen::Index index(int y, int x, int c) const noexcept {
    return (static_cast<Eigen::Index>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  Eigen::VectorXf pixels_;
};

using ImageBatch = std::vector<Image>;

}  // namespace mra
