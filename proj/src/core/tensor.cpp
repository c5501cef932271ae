#include "mra/tensor.hpp"

#include "mra/error.hpp"

namespace mra {

std::string_view to_string(DType dtype) {
  return dtype == DType::f32 ? "f32" : "f64";
}

DType parse_dtype(std::string_view name) {
  if (name == "f32") return DType::f32;
  if (name == "f64") return DType::f64;
  fail(ErrorKind::validation, "unknown dtype '" + std::string(name) + "'");
}

std::size_t dtype_size(DType dtype) { return dtype == DType::f32 ? 4 : 8; }

std::int64_t TensorSpec::element_count() const {
  std::int64_t count = 1;
  for (auto dim : shape) count *= dim;
  return count;
}

void TensorSpec::validate(std::int64_t cap) const {
  std::int64_t count = 1;
  for (auto dim : shape) {
    if (dim <= 0) fail(ErrorKind::validation, "tensor dimension must be positive");
    if (count > cap / dim) fail(ErrorKind::validation, "tensor exceeds element cap");
    count *= dim;
  }
}

}  // namespace mra
