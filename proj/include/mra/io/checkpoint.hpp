#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mra/nn/optimizer.hpp"
#include "mra/tensor.hpp"

namespace mra::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'M', 'R', 'A', 'C', 'K', 'P', 'T', '1'};

/// One named tensor: shape, dtype and raw little-endian column-major bytes.
struct TensorRecord {
  std::string name;
  std::vector<std::int64_t> shape;
  DType dtype = DType::f32;
  std::vector<std::byte> data;

  friend bool operator==(const TensorRecord&, const TensorRecord&) = default;
};

/// File layout:
///   "MRACKPT1" | u32 version | u64 header length | JSON header |
///   tensor bytes | SHA-256 of everything before it (32 bytes)
/// All integers little-endian. The header lists every tensor with its
/// byte offset into the data region.
struct Checkpoint {
  std::string kind;  // "mae" or "classifier"
  nlohmann::json config = nlohmann::json::object();
  std::int64_t step = 0;
  std::string rng_state;
  std::vector<TensorRecord> tensors;
  nlohmann::json optimizer = nlohmann::json::object();
  std::vector<TensorRecord> optimizer_tensors;
  nlohmann::json extra = nlohmann::json::object();

  const TensorRecord* find(std::string_view name) const;
  // Throws ErrorKind::schema naming both kinds on mismatch.
  void expect_kind(std::string_view expected) const;
};

std::vector<std::byte> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::span<const std::byte> bytes, const std::string& source = "<memory>");

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename Scalar>
TensorRecord to_record(const std::string& name, const Matrix<Scalar>& m) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  TensorRecord r{name, {m.rows(), m.cols()}, dtype_of<Scalar>(), {}};
  r.data.resize(sizeof(Scalar) * static_cast<std::size_t>(m.size()));
  if (!r.data.empty()) std::memcpy(r.data.data(), m.data(), r.data.size());
  return r;
}

/// Copies a record into `out`, which must already have the stored shape.
template <typename Scalar>
void from_record(const TensorRecord& r, Matrix<Scalar>& out) {
  if (r.dtype != dtype_of<Scalar>()) {
    fail(ErrorKind::schema, "tensor " + r.name + " is " + std::string(to_string(r.dtype)) +
                                ", expected " + std::string(to_string(dtype_of<Scalar>())));
  }
  if (r.shape.size() != 2 || r.shape[0] != out.rows() || r.shape[1] != out.cols()) {
    fail(ErrorKind::schema, "tensor " + r.name + " has a different shape than the model expects");
  }
  if (r.data.size() != sizeof(Scalar) * static_cast<std::size_t>(out.size())) {
    fail(ErrorKind::corrupt_checkpoint, "tensor " + r.name + " byte count does not match its shape");
  }
  if (!r.data.empty()) std::memcpy(out.data(), r.data.data(), r.data.size());
}

template <typename Scalar>
void store_parameters(Checkpoint& ckpt, const nn::ConstParameterList<Scalar>& params) {
  ckpt.tensors.clear();
  for (const auto* p : params) ckpt.tensors.push_back(to_record(p->name, p->value));
}

/// Strict: every parameter must be present and no unknown tensor may remain.
template <typename Scalar>
void restore_parameters(const Checkpoint& ckpt, const nn::ParameterList<Scalar>& params) {
  if (ckpt.tensors.size() != params.size()) {
    fail(ErrorKind::schema, "checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                                " tensors, model has " + std::to_string(params.size()));
  }
  for (auto* p : params) {
    const TensorRecord* r = ckpt.find(p->name);
    if (r == nullptr) fail(ErrorKind::schema, "checkpoint lacks tensor " + p->name);
    from_record(*r, p->value);
  }
}

nlohmann::json to_json(const nn::OptimizerConfig& config);
nn::OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

template <typename Scalar>
void store_optimizer(Checkpoint& ckpt, const nn::Optimizer<Scalar>& opt) {
  ckpt.optimizer = {{"config", to_json(opt.config())}, {"step_count", opt.step_count()}};
  ckpt.optimizer_tensors.clear();
  for (const auto& [name, slot] : opt.slots()) {
    if (slot.first.size() > 0) ckpt.optimizer_tensors.push_back(to_record(name + "/first", slot.first));
    if (slot.second.size() > 0) ckpt.optimizer_tensors.push_back(to_record(name + "/second", slot.second));
  }
}

template <typename Scalar>
nn::Optimizer<Scalar> restore_optimizer(const Checkpoint& ckpt) {
  if (!ckpt.optimizer.contains("config")) fail(ErrorKind::schema, "checkpoint has no optimizer state");
  nn::Optimizer<Scalar> opt(optimizer_config_from_json(ckpt.optimizer.at("config")));
  opt.set_step_count(ckpt.optimizer.value("step_count", std::int64_t{0}));
  for (const auto& r : ckpt.optimizer_tensors) {
    const auto slash = r.name.rfind('/');
    if (slash == std::string::npos || r.shape.size() != 2) {
      fail(ErrorKind::corrupt_checkpoint, "malformed optimizer tensor " + r.name);
    }
    auto& slot = opt.slots()[r.name.substr(0, slash)];
    Matrix<Scalar>& target = r.name.substr(slash + 1) == "first" ? slot.first : slot.second;
    target.resize(r.shape[0], r.shape[1]);
    from_record(r, target);
  }
  return opt;
}

}  // namespace mra::io
