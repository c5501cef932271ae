#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mra {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Index = Eigen::Index;

enum class DType { f32, f64 };

template <typename Scalar>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() { return DType::f32; }
template <>
constexpr DType dtype_of<double>() { return DType::f64; }

std::string_view to_string(DType dtype);
DType parse_dtype(std::string_view name);
std::size_t dtype_size(DType dtype);

// Upper bound on the element count of any single tensor. Desk-scale models
// stay several orders of magnitude below it.
inline constexpr std::int64_t kDefaultElementCap = std::int64_t{1} << 28;

struct TensorSpec {
  std::vector<std::int64_t> shape;
  DType dtype = DType::f32;

  std::int64_t element_count() const;
  // Throws ErrorKind::validation for non-positive dims or a count above cap.
  void validate(std::int64_t cap = kDefaultElementCap) const;
};

}  // namespace mra
