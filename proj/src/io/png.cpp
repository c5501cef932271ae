#include "mra/io/png.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <png.h>

#include "mra/error.hpp"
#include "mra/io/files.hpp"

namespace mra::io {

std::vector<std::byte> encode_png(const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    fail(ErrorKind::validation, "png: only 1- or 3-channel images can be written");
  }
  std::vector<png_byte> pixels(image.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const float v = std::clamp(image.pixels()[static_cast<Eigen::Index>(i)], 0.0f, 1.0f);
    pixels[i] = static_cast<png_byte>(std::lround(v * 255.0f));
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = image.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    fail(ErrorKind::io, std::string("png encode failed: ") + png.message);
  }
  std::vector<std::byte> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    fail(ErrorKind::io, std::string("png encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(const std::vector<std::byte>& bytes, const std::string& source) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    fail(ErrorKind::corrupt_data, source + ": " + png.message);
  }
  const bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
    fail(ErrorKind::corrupt_data, source + ": " + png.message);
  }
  Image image(static_cast<int>(png.height), static_cast<int>(png.width), gray ? 1 : 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    image.pixels()[static_cast<Eigen::Index>(i)] = static_cast<float>(pixels[i]) / 255.0f;
  }
  return image;
}

Image read_png(const std::filesystem::path& path) {
  return decode_png(read_file(path), path.string());
}

void write_png(const std::filesystem::path& path, const Image& image) {
  write_file_atomic(path, encode_png(image));
}

}  // namespace mra::io
