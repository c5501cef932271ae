#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "mra/image.hpp"

namespace mra::io {

/// 8-bit PNG encoding of a 1- or 3-channel image; values are clamped to
/// [0, 1] and rounded to the nearest level.
std::vector<std::byte> encode_png(const Image& image);
/// Decodes grayscale or RGB(A) PNGs; alpha is dropped, gray stays 1 channel.
Image decode_png(const std::vector<std::byte>& bytes, const std::string& source = "<memory>");

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace mra::io
