#pragma once

#include <string>

#include "mra/nn/init.hpp"
#include "mra/nn/parameter.hpp"

namespace mra::nn {

/// y = x W + b over row-major token/sample matrices (rows are items).
template <typename Scalar>
class Linear {
 public:
  struct Cache {
    Matrix<Scalar> input;
  };

  Linear() = default;
  Linear(const std::string& name, int in_features, int out_features)
      : weight(name + ".weight", in_features, out_features, true),
        bias(name + ".bias", 1, out_features, false) {}

  int in_features() const { return static_cast<int>(weight.value.rows()); }
  int out_features() const { return static_cast<int>(weight.value.cols()); }

  void init(Rng& rng, double stddev = 0.02) {
    fill_truncated_normal(weight.value, rng, stddev);
    bias.value.setZero();
  }

  void init(Rng& rng, LinearInit scheme) {
    if (scheme == LinearInit::truncated_normal) return init(rng);
    fill_xavier_uniform(weight.value, rng);
    bias.value.setZero();
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& x, Cache* cache = nullptr) const {
    if (x.cols() != weight.value.rows()) {
      fail(ErrorKind::validation, weight.name + ": input width " + std::to_string(x.cols()) +
                                      " != " + std::to_string(weight.value.rows()));
    }
    Matrix<Scalar> y = x * weight.value;
    y.rowwise() += bias.value.row(0);
    if (cache) cache->input = x;
    return y;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, const Cache& cache) {
    weight.grad.noalias() += cache.input.transpose() * dy;
    bias.grad.row(0) += dy.colwise().sum();
    return dy * weight.value.transpose();
  }

  template <typename List>
  void append_parameters(List& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
  template <typename List>
  void append_parameters(List& out) const {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  Parameter<Scalar> weight;
  Parameter<Scalar> bias;
};

extern template class Linear<float>;
extern template class Linear<double>;

}  // namespace mra::nn
