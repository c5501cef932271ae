#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mra/image.hpp"
#include "mra/io/checkpoint.hpp"

namespace mra::io {

inline constexpr std::string_view kManifestName = "manifest.json";

/// Root of one run's artifacts. Every write goes through resolve(), which
/// refuses absolute paths and anything that would land outside the root.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path resolve(std::string_view relative) const;
  OutputDir subdir(std::string_view relative) const { return OutputDir(resolve(relative)); }
  bool exists(std::string_view relative) const;

  void write_text(std::string_view relative, std::string_view text) const;
  void write_bytes(std::string_view relative, std::span<const std::byte> bytes) const;
  void write_json(std::string_view relative, const nlohmann::json& value) const;
  void write_png(std::string_view relative, const Image& image) const;
  void write_checkpoint(std::string_view relative, const Checkpoint& checkpoint) const;

  /// Lists every file under the root (recursively, sorted) with its SHA-256
  /// and size, and writes it to manifest.json.
  nlohmann::json write_manifest(const std::string& config_hash) const;

 private:
  std::filesystem::path root_;
};

/// Recomputes checksums and reports the first listed artifact whose bytes
/// no longer match; empty string when the manifest is consistent.
std::string verify_manifest(const std::filesystem::path& root);

}  // namespace mra::io
