#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mra/image.hpp"

namespace mra::io {

struct LabeledImages {
  ImageBatch images;
  std::vector<int> labels;

  int size() const { return static_cast<int>(images.size()); }
};

struct Dataset {
  std::string id;
  int num_classes = 0;
  std::vector<std::string> class_names;
  LabeledImages train;
  LabeledImages eval;
};

struct DatasetOptions {
  int train_size = 0;   // 0 keeps the full split
  int eval_size = 0;    // 0 keeps the full split
  int image_size = 0;   // 0 keeps native size; otherwise square bilinear resize
  int num_classes = 0;  // 0 keeps every class; otherwise labels < num_classes only
};

/// Accepted ids:
///   cifar10[:<dir>]        binary CIFAR-10 batches (default $MRA_DATA_DIR/cifar-10-batches-bin)
///   folder:<dir>           PNGs under <dir>/<class>/ or <dir>/{train,eval}/<class>/
///   synthetic:two-blobs    separable 2-class set
///   synthetic:gradients    4-class smooth gradient images
///   synthetic:shapes10     10 balanced classes of shapes on textured backgrounds
Dataset load_dataset(std::string_view id, const DatasetOptions& options = {});

std::vector<std::string> synthetic_dataset_names();

inline constexpr std::size_t kCifarRecordSize = 1 + 32 * 32 * 3;

/// Parses concatenated CIFAR-10 records (label byte + channel-planar
/// 32x32 RGB). A length that is not a whole number of records raises
/// ErrorKind::corrupt_data naming the offset of the partial record.
LabeledImages parse_cifar_records(std::span<const std::byte> bytes, const std::string& source);

Image resize_bilinear(const Image& image, int height, int width);

}  // namespace mra::io
