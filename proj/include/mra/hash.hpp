#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "mra/nn/parameter.hpp"

namespace mra {

/// Incremental SHA-256 (OpenSSL EVP) with hex output.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t size);
  using Digest = std::array<std::byte, 32>;

  void update(std::string_view text) { update(text.data(), text.size()); }
  // Finalizes; the object must not be updated afterwards.
  Digest digest();
  std::string hex_digest();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

std::string to_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::string_view text);

/// Digest over every parameter's name, shape and raw value bytes, in order.
template <typename Scalar>
std::string parameter_digest(const nn::ConstParameterList<Scalar>& params) {
  Sha256 hasher;
  for (const auto* p : params) {
    hasher.update(p->name);
    const std::int64_t shape[2] = {p->value.rows(), p->value.cols()};
    hasher.update(shape, sizeof(shape));
    hasher.update(p->value.data(), sizeof(Scalar) * static_cast<std::size_t>(p->value.size()));
  }
  return hasher.hex_digest();
}

}  // namespace mra
