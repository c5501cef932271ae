#include "mra/io/output_dir.hpp"

#include <algorithm>
#include <system_error>
#include <vector>

#include "mra/error.hpp"
#include "mra/hash.hpp"
#include "mra/io/files.hpp"
#include "mra/io/png.hpp"

namespace mra::io {

namespace fs = std::filesystem;
using nlohmann::json;

OutputDir::OutputDir(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory '" + root_.string() + "': " + ec.message());
  root_ = fs::weakly_canonical(root_);
}

fs::path OutputDir::resolve(std::string_view relative) const {
  const fs::path rel = fs::path(relative).lexically_normal();
  if (rel.empty() || rel.is_absolute() || rel.has_root_name() || *rel.begin() == "..") {
    fail(ErrorKind::validation, "artifact path '" + std::string(relative) + "' escapes the output directory");
  }
  const fs::path full = fs::weakly_canonical(root_ / rel);
  const auto [root_end, _] = std::mismatch(root_.begin(), root_.end(), full.begin(), full.end());
  if (root_end != root_.end()) {
    fail(ErrorKind::validation, "artifact path '" + std::string(relative) + "' escapes the output directory");
  }
  return full;
}

bool OutputDir::exists(std::string_view relative) const { return fs::exists(resolve(relative)); }

void OutputDir::write_text(std::string_view relative, std::string_view text) const {
  write_file_atomic(resolve(relative), text);
}

void OutputDir::write_bytes(std::string_view relative, std::span<const std::byte> bytes) const {
  write_file_atomic(resolve(relative), bytes);
}

void OutputDir::write_json(std::string_view relative, const json& value) const {
  write_text(relative, value.dump(2) + "\n");
}

void OutputDir::write_png(std::string_view relative, const Image& image) const {
  write_bytes(relative, encode_png(image));
}

void OutputDir::write_checkpoint(std::string_view relative, const Checkpoint& checkpoint) const {
  write_bytes(relative, serialize_checkpoint(checkpoint));
}

json OutputDir::write_manifest(const std::string& config_hash) const {
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), root_).generic_string();
    if (rel == kManifestName || rel.find(".tmp.") != std::string::npos) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  json artifacts = json::array();
  for (const auto& rel : files) {
    const auto bytes = read_file(root_ / rel);
    artifacts.push_back({{"path", rel}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }
  json manifest = {{"schema_version", 1}, {"config_hash", config_hash}, {"artifacts", artifacts}};
  write_json(kManifestName, manifest);
  return manifest;
}

std::string verify_manifest(const fs::path& root) {
  const json manifest = json::parse(read_text_file(root / kManifestName));
  for (const auto& a : manifest.at("artifacts")) {
    const std::string rel = a.at("path").get<std::string>();
    if (!fs::exists(root / rel)) return rel;
    if (sha256_hex(read_file(root / rel)) != a.at("sha256").get<std::string>()) return rel;
  }
  return {};
}

}  // namespace mra::io
