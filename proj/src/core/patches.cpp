#include "mra/patches.hpp"

#include <algorithm>
#include <string>

#include "mra/error.hpp"

namespace mra {

PatchGeometry::PatchGeometry(int image_height, int image_width, int channels,
                             int patch_size)
    : patch_size_(patch_size), channels_(channels) {
  if (patch_size < 1) fail(ErrorKind::geometry, "patch size must be >= 1");
  if (channels < 1) fail(ErrorKind::geometry, "channel count must be >= 1");
  if (image_height < 1 || image_width < 1 || image_height % patch_size != 0 ||
      image_width % patch_size != 0) {
    fail(ErrorKind::geometry,
         "image " + std::to_string(image_height) + "x" + std::to_string(image_width) +
             " is not divisible into " + std::to_string(patch_size) + "-pixel patches");
  }
  grid_h_ = image_height / patch_size;
  grid_w_ = image_width / patch_size;
}

PixelBlock PatchGeometry::block(int index) const {
  if (index < 0 || index >= num_patches()) {
    fail(ErrorKind::validation, "patch index " + std::to_string(index) + " out of range");
  }
  const int row = index / grid_w_;
  const int col = index % grid_w_;
  return {row * patch_size_, (row + 1) * patch_size_, col * patch_size_,
          (col + 1) * patch_size_};
}

void PatchGeometry::check_image(const Image& image) const {
  if (image.height() != height() || image.width() != width() ||
      image.channels() != channels_) {
    fail(ErrorKind::geometry,
         "image " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
             "x" + std::to_string(image.channels()) + " does not match patch grid " +
             std::to_string(height()) + "x" + std::to_string(width()) + "x" +
             std::to_string(channels_));
  }
}

PatchSequence patchify(const Image& image, const PatchGeometry& geometry) {
  geometry.check_image(image);
  const int p = geometry.patch_size();
  const int c = geometry.channels();
  PatchSequence patches(geometry.num_patches(), geometry.patch_dim());
  for (int i = 0; i < geometry.num_patches(); ++i) {
    const PixelBlock b = geometry.block(i);
    for (int py = 0; py < p; ++py) {
      for (int px = 0; px < p; ++px) {
        for (int ch = 0; ch < c; ++ch) {
          patches(i, (py * p + px) * c + ch) = image(b.row_begin + py, b.col_begin + px, ch);
        }
      }
    }
  }
  return patches;
}

Image unpatchify(const Eigen::Ref<const PatchSequence>& patches,
                 const PatchGeometry& geometry) {
  if (patches.rows() != geometry.num_patches() || patches.cols() != geometry.patch_dim()) {
    fail(ErrorKind::geometry,
         "patch sequence " + std::to_string(patches.rows()) + "x" +
             std::to_string(patches.cols()) + " does not match " +
             std::to_string(geometry.num_patches()) + "x" +
             std::to_string(geometry.patch_dim()));
  }
  const int p = geometry.patch_size();
  const int c = geometry.channels();
  Image image(geometry.height(), geometry.width(), c);
  for (int i = 0; i < geometry.num_patches(); ++i) {
    const PixelBlock b = geometry.block(i);
    for (int py = 0; py < p; ++py) {
      for (int px = 0; px < p; ++px) {
        for (int ch = 0; ch < c; ++ch) {
          image(b.row_begin + py, b.col_begin + px, ch) = patches(i, (py * p + px) * c + ch);
        }
      }
    }
  }
  return image;
}

TopKIndexSet::TopKIndexSet(std::vector<int> indices, int budget, int num_patches)
    : indices_(std::move(indices)), budget_(budget), num_patches_(num_patches) {
  if (budget < 0) fail(ErrorKind::validation, "index budget must be non-negative");
  std::sort(indices_.begin(), indices_.end());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= num_patches) {
      fail(ErrorKind::validation, "patch index " + std::to_string(indices_[i]) +
                                      " out of range [0, " + std::to_string(num_patches) + ")");
    }
    if (i > 0 && indices_[i] == indices_[i - 1]) {
      fail(ErrorKind::validation, "duplicate patch index " + std::to_string(indices_[i]));
    }
  }
  if (static_cast<int>(indices_.size()) != std::min(budget, num_patches)) {
    fail(ErrorKind::validation, "index set holds " + std::to_string(indices_.size()) +
                                    " entries, budget requires " +
                                    std::to_string(std::min(budget, num_patches)));
  }
}

TopKIndexSet TopKIndexSet::all(int num_patches) {
  std::vector<int> indices(static_cast<std::size_t>(num_patches));
  for (int i = 0; i < num_patches; ++i) indices[static_cast<std::size_t>(i)] = i;
  return {std::move(indices), num_patches, num_patches};
}

bool TopKIndexSet::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

std::vector<int> TopKIndexSet::complement() const {
  std::vector<int> rest;
  rest.reserve(static_cast<std::size_t>(num_patches_) - indices_.size());
  auto it = indices_.begin();
  for (int i = 0; i < num_patches_; ++i) {
    if (it != indices_.end() && *it == i) {
      ++it;
    } else {
      rest.push_back(i);
    }
  }
  return rest;
}

BinaryMask::BinaryMask(const PatchGeometry& geometry, Bits bits)
    : geometry_(geometry), bits_(std::move(bits)) {
  if (bits_.rows() != geometry.height() || bits_.cols() != geometry.width()) {
    fail(ErrorKind::geometry, "mask shape does not match its geometry");
  }
}

std::int64_t BinaryMask::popcount() const {
  return bits_.cast<std::int64_t>().sum();
}

bool BinaryMask::is_block_constant() const {
  for (int i = 0; i < geometry_.num_patches(); ++i) {
    const PixelBlock b = geometry_.block(i);
    const auto block = bits_.block(b.row_begin, b.col_begin, b.row_end - b.row_begin,
                                   b.col_end - b.col_begin);
    if (block.minCoeff() != block.maxCoeff()) return false;
  }
  return true;
}

BinaryMask mask_from_indices(const TopKIndexSet& keep, const PatchGeometry& geometry) {
  if (keep.num_patches() != geometry.num_patches()) {
    fail(ErrorKind::validation, "index set was built for " +
                                    std::to_string(keep.num_patches()) + " patches, grid has " +
                                    std::to_string(geometry.num_patches()));
  }
  BinaryMask::Bits bits = BinaryMask::Bits::Zero(geometry.height(), geometry.width());
  for (int index : keep.indices()) {
    const PixelBlock b = geometry.block(index);
    bits.block(b.row_begin, b.col_begin, b.row_end - b.row_begin, b.col_end - b.col_begin)
        .setOnes();
  }
  return {geometry, std::move(bits)};
}

Image apply_mask(const Image& image, const BinaryMask& mask) {
  mask.geometry().check_image(image);
  Image out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (mask(y, x) != 0) continue;
      for (int c = 0; c < image.channels(); ++c) out(y, x, c) = 0.0f;
    }
  }
  return out;
}

}  // namespace mra
