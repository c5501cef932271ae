#include "mra/io/checkpoint.hpp"

#include <algorithm>
#include <set>

#include "mra/hash.hpp"
#include "mra/io/files.hpp"

namespace mra::io {

using nlohmann::json;

namespace {

constexpr std::size_t kPreambleSize = sizeof(kCheckpointMagic) + 4 + 8;
constexpr std::size_t kDigestSize = 32;

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::span<const std::byte> bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= std::to_integer<std::uint64_t>(bytes[offset + i]) << (8 * i);
  }
  return static_cast<T>(v);
}

json table_json(const std::vector<TensorRecord>& records, std::uint64_t& offset) {
  json table = json::array();
  for (const auto& r : records) {
    table.push_back({{"name", r.name},
                     {"shape", r.shape},
                     {"dtype", std::string(to_string(r.dtype))},
                     {"offset", offset},
                     {"nbytes", r.data.size()}});
    offset += r.data.size();
  }
  return table;
}

std::vector<TensorRecord> read_table(const json& table, std::span<const std::byte> data,
                                     const std::string& source) {
  std::vector<TensorRecord> out;
  std::set<std::string> names;
  for (const auto& entry : table) {
    TensorRecord r;
    r.name = entry.at("name").get<std::string>();
    r.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    r.dtype = parse_dtype(entry.at("dtype").get<std::string>());
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
    if (!names.insert(r.name).second) {
      fail(ErrorKind::corrupt_checkpoint, source + ": duplicate tensor name " + r.name);
    }
    std::int64_t count = 1;
    for (auto d : r.shape) {
      if (d < 0) fail(ErrorKind::corrupt_checkpoint, source + ": negative dimension in " + r.name);
      count *= d;
    }
    if (offset > data.size() || nbytes > data.size() - offset ||
        nbytes != static_cast<std::uint64_t>(count) * dtype_size(r.dtype)) {
      fail(ErrorKind::corrupt_checkpoint, source + ": tensor " + r.name + " lies outside the data region");
    }
    r.data.assign(data.begin() + static_cast<std::ptrdiff_t>(offset),
                  data.begin() + static_cast<std::ptrdiff_t>(offset + nbytes));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

const TensorRecord* Checkpoint::find(std::string_view name) const {
  for (const auto& r : tensors) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void Checkpoint::expect_kind(std::string_view expected) const {
  if (kind != expected) {
    fail(ErrorKind::schema, "checkpoint holds a '" + kind + "' config, expected '" +
                                std::string(expected) + "'");
  }
}

std::vector<std::byte> serialize_checkpoint(const Checkpoint& ckpt) {
  std::uint64_t offset = 0;
  json header = {{"kind", ckpt.kind},
                 {"layout", "column_major"},
                 {"config", ckpt.config},
                 {"step", ckpt.step},
                 {"rng_state", ckpt.rng_state},
                 {"extra", ckpt.extra}};
  header["tensors"] = table_json(ckpt.tensors, offset);
  json optimizer = ckpt.optimizer;
  optimizer["tensors"] = table_json(ckpt.optimizer_tensors, offset);
  header["optimizer"] = std::move(optimizer);
  const std::string text = header.dump();

  std::vector<std::byte> out;
  out.reserve(kPreambleSize + text.size() + offset + kDigestSize);
  for (char c : kCheckpointMagic) out.push_back(static_cast<std::byte>(c));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  const auto text_bytes = as_bytes(text);
  out.insert(out.end(), text_bytes.begin(), text_bytes.end());
  for (const auto* table : {&ckpt.tensors, &ckpt.optimizer_tensors}) {
    for (const auto& r : *table) out.insert(out.end(), r.data.begin(), r.data.end());
  }
  Sha256 hasher;
  hasher.update(out.data(), out.size());
  const auto digest = hasher.digest();
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

Checkpoint parse_checkpoint(std::span<const std::byte> bytes, const std::string& source) {
  if (bytes.size() < kPreambleSize + kDigestSize) {
    fail(ErrorKind::corrupt_checkpoint, source + ": truncated checkpoint (" +
                                            std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    fail(ErrorKind::corrupt_checkpoint, source + ": not a checkpoint file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(bytes, sizeof(kCheckpointMagic));
  if (version != kCheckpointVersion) {
    fail(ErrorKind::version, source + ": checkpoint format version " + std::to_string(version) +
                                 " is not supported (this build reads version " +
                                 std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t body = bytes.size() - kDigestSize;
  Sha256 hasher;
  hasher.update(bytes.data(), body);
  const auto digest = hasher.digest();
  if (std::memcmp(digest.data(), bytes.data() + body, kDigestSize) != 0) {
    fail(ErrorKind::corrupt_checkpoint, source + ": checksum mismatch (file truncated or modified)");
  }
  const auto header_len = get_le<std::uint64_t>(bytes, sizeof(kCheckpointMagic) + 4);
  if (header_len > body - kPreambleSize) {
    fail(ErrorKind::corrupt_checkpoint, source + ": header length exceeds file size");
  }
  const auto data = bytes.subspan(kPreambleSize + header_len, body - kPreambleSize - header_len);
  try {
    const json header = json::parse(reinterpret_cast<const char*>(bytes.data() + kPreambleSize),
                                    reinterpret_cast<const char*>(bytes.data() + kPreambleSize + header_len));
    Checkpoint ckpt;
    ckpt.kind = header.at("kind").get<std::string>();
    ckpt.config = header.at("config");
    ckpt.step = header.at("step").get<std::int64_t>();
    ckpt.rng_state = header.at("rng_state").get<std::string>();
    ckpt.extra = header.at("extra");
    ckpt.tensors = read_table(header.at("tensors"), data, source);
    ckpt.optimizer = header.at("optimizer");
    ckpt.optimizer_tensors = read_table(ckpt.optimizer.at("tensors"), data, source);
    ckpt.optimizer.erase("tensors");
    return ckpt;
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt_checkpoint, source + ": malformed header: " + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_checkpoint(bytes, path.string());
}

json to_json(const nn::OptimizerConfig& c) {
  return {{"kind", std::string(nn::to_string(c.kind))},
          {"learning_rate", c.learning_rate},
          {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon}};
}

nn::OptimizerConfig optimizer_config_from_json(const json& j) {
  try {
    nn::OptimizerConfig c;
    c.kind = nn::parse_optimizer_kind(j.at("kind").get<std::string>());
    c.learning_rate = j.at("learning_rate").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, std::string("optimizer config: ") + e.what());
  }
}

}  // namespace mra::io
