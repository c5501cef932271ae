#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mra/error.hpp"
#include "mra/tensor.hpp"

namespace mra::nn {

/// A named trainable tensor with its gradient accumulator.
template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool decay = true;  // participates in weight decay

  Parameter() = default;
  Parameter(std::string parameter_name, Index rows, Index cols, bool weight_decay = true)
      : name(std::move(parameter_name)),
        value(Matrix<Scalar>::Zero(rows, cols)),
        grad(Matrix<Scalar>::Zero(rows, cols)),
        decay(weight_decay) {}

  Index size() const { return value.size(); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <typename Scalar>
using ParameterList = std::vector<Parameter<Scalar>*>;
template <typename Scalar>
using ConstParameterList = std::vector<const Parameter<Scalar>*>;

template <typename Scalar>
void zero_grads(const ParameterList<Scalar>& params) {
  for (auto* p : params) p->zero_grad();
}

template <typename Scalar>
std::int64_t parameter_count(const ConstParameterList<Scalar>& params) {
  std::int64_t total = 0;
  for (const auto* p : params) total += p->size();
  return total;
}

}  // namespace mra::nn
