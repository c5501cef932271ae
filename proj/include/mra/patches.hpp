#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mra/image.hpp"
#include "mra/tensor.hpp"

namespace mra {

/// Half-open pixel rectangle [row_begin, row_end) x [col_begin, col_end).
struct PixelBlock {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;
};

/// Square, non-overlapping patch grid over an H x W x C image. Patch i sits
/// at grid row i / grid_w and grid column i % grid_w.
class PatchGeometry {
 public:
  PatchGeometry() = default;
  PatchGeometry(int image_height, int image_width, int channels, int patch_size);

  static PatchGeometry for_image(const Image& image, int patch_size) {
    return {image.height(), image.width(), image.channels(), patch_size};
  }

  int patch_size() const noexcept { return patch_size_; }
  int grid_h() const noexcept { return grid_h_; }
  int grid_w() const noexcept { return grid_w_; }
  int channels() const noexcept { return channels_; }
  int num_patches() const noexcept { return grid_h_ * grid_w_; }
  int patch_dim() const noexcept { return patch_size_ * patch_size_ * channels_; }
  int height() const noexcept { return grid_h_ * patch_size_; }
  int width() const noexcept { return grid_w_ * patch_size_; }

  PixelBlock block(int index) const;
  // Throws ErrorKind::geometry when the image does not match this grid.
  void check_image(const Image& image) const;

  friend bool operator==(const PatchGeometry&, const PatchGeometry&) = default;

 private:
  int patch_size_ = 1;
  int grid_h_ = 0;
  int grid_w_ = 0;
  int channels_ = 0;
};

/// N x (P*P*C) matrix; row i is patch i with pixels in (row, col, channel) order.
using PatchSequence = Matrix<float>;

PatchSequence patchify(const Image& image, const PatchGeometry& geometry);
Image unpatchify(const Eigen::Ref<const PatchSequence>& patches,
                 const PatchGeometry& geometry);

/// Ascending set of distinct patch indices with the budget it was drawn
/// against. Holds exactly min(budget, num_patches) entries.
class TopKIndexSet {
 public:
  TopKIndexSet() = default;
  TopKIndexSet(std::vector<int> indices, int budget, int num_patches);

  static TopKIndexSet all(int num_patches);
  static TopKIndexSet none(int num_patches) { return {{}, 0, num_patches}; }

  const std::vector<int>& indices() const noexcept { return indices_; }
  int budget() const noexcept { return budget_; }
  int size() const noexcept { return static_cast<int>(indices_.size()); }
  bool empty() const noexcept { return indices_.empty(); }
  int num_patches() const noexcept { return num_patches_; }

  bool contains(int index) const;
  std::vector<int> complement() const;

  friend bool operator==(const TopKIndexSet&, const TopKIndexSet&) = default;

 private:
  std::vector<int> indices_;
  int budget_ = 0;
  int num_patches_ = 0;
};

/// H x W block-wise mask; 1 keeps a pixel, 0 erases it.
class BinaryMask {
 public:
  using Bits = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BinaryMask() = default;
  BinaryMask(const PatchGeometry& geometry, Bits bits);

  const PatchGeometry& geometry() const noexcept { return geometry_; }
  const Bits& bits() const noexcept { return bits_; }
  std::uint8_t operator()(int y, int x) const { return bits_(y, x); }

  std::int64_t popcount() const;
  bool is_block_constant() const;

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.geometry_ == b.geometry_ && a.bits_ == b.bits_;
  }

 private:
  PatchGeometry geometry_;
  Bits bits_;
};

BinaryMask mask_from_indices(const TopKIndexSet& keep, const PatchGeometry& geometry);
Image apply_mask(const Image& image, const BinaryMask& mask);

}  // namespace mra
