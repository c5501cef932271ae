#pragma once

#include <string>

#include "mra/nn/functional.hpp"
#include "mra/nn/linear.hpp"

namespace mra::nn {

// fc2(gelu(fc1(x)))
template <typename Scalar>
class Mlp {
 public:
  struct Cache {
    typename Linear<Scalar>::Cache fc1_cache;
    typename Linear<Scalar>::Cache fc2_cache;
    Matrix<Scalar> pre_activation;
  };

  Mlp() = default;
  Mlp(const std::string& name, int dim, int hidden)
      : fc1(name + ".fc1", dim, hidden), fc2(name + ".fc2", hidden, dim) {}

  void init(Rng& rng, double stddev = 0.02) {
    fc1.init(rng, stddev);
    fc2.init(rng, stddev);
  }

  void init(Rng& rng, LinearInit scheme) {
    fc1.init(rng, scheme);
    fc2.init(rng, scheme);
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& x, Cache* cache = nullptr) const {
    Matrix<Scalar> h = fc1.forward(x, cache ? &cache->fc1_cache : nullptr);
    Matrix<Scalar> a = h.unaryExpr([](Scalar v) { return gelu(v); });
    if (cache) cache->pre_activation = std::move(h);
    return fc2.forward(a, cache ? &cache->fc2_cache : nullptr);
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, const Cache& cache) {
    Matrix<Scalar> da = fc2.backward(dy, cache.fc2_cache);
    da.array() *= cache.pre_activation.unaryExpr([](Scalar v) { return gelu_derivative(v); }).array();
    return fc1.backward(da, cache.fc1_cache);
  }

  template <typename List>
  void append_parameters(List& out) {
    fc1.append_parameters(out);
    fc2.append_parameters(out);
  }
  template <typename List>
  void append_parameters(List& out) const {
    fc1.append_parameters(out);
    fc2.append_parameters(out);
  }

  Linear<Scalar> fc1;
  Linear<Scalar> fc2;
};

extern template class Mlp<float>;
extern template class Mlp<double>;

}  // namespace mra::nn
