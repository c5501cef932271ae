#pragma once

#include <cmath>
#include <string>

#include "mra/nn/parameter.hpp"

namespace mra::nn {

/// Per-row normalization with a learned gain and bias.
template <typename Scalar>
class LayerNorm {
 public:
  struct Cache {
    Matrix<Scalar> normalized;
    Vector<Scalar> inv_std;
  };

  LayerNorm() = default;
  LayerNorm(const std::string& name, int dim, double epsilon = 1e-6)
      : gain(name + ".gain", 1, dim, false),
        bias(name + ".bias", 1, dim, false),
        epsilon_(epsilon) {
    gain.value.setOnes();
  }

  int dim() const { return static_cast<int>(gain.value.cols()); }

  Matrix<Scalar> normalize(const Matrix<Scalar>& x, Vector<Scalar>* inv_std = nullptr) const {
    Matrix<Scalar> xhat(x.rows(), x.cols());
    if (inv_std) inv_std->resize(x.rows());
    for (Index r = 0; r < x.rows(); ++r) {
      const Scalar mean = x.row(r).mean();
      const Scalar var = (x.row(r).array() - mean).square().mean();
      const Scalar inv = Scalar(1) / std::sqrt(var + Scalar(epsilon_));
      xhat.row(r) = (x.row(r).array() - mean) * inv;
      if (inv_std) (*inv_std)(r) = inv;
    }
    return xhat;
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& x, Cache* cache = nullptr) const {
    if (x.cols() != gain.value.cols()) {
      fail(ErrorKind::validation, gain.name + ": input width mismatch");
    }
    Vector<Scalar> inv_std;
    Matrix<Scalar> xhat = normalize(x, &inv_std);
    Matrix<Scalar> y =
        ((xhat.array().rowwise() * gain.value.row(0).array()).rowwise() +
         bias.value.row(0).array())
            .matrix();
    if (cache) {
      cache->normalized = std::move(xhat);
      cache->inv_std = std::move(inv_std);
    }
    return y;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, const Cache& cache) {
    const auto& xhat = cache.normalized;
    gain.grad.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
    bias.grad.row(0) += dy.colwise().sum();
    Matrix<Scalar> dxhat = (dy.array().rowwise() * gain.value.row(0).array()).matrix();
    const Vector<Scalar> mean_dxhat = dxhat.rowwise().mean();
    const Vector<Scalar> mean_dxhat_xhat = (dxhat.array() * xhat.array()).rowwise().mean();
    Matrix<Scalar> dx = dxhat;
    dx.colwise() -= mean_dxhat;
    dx.array() -= xhat.array().colwise() * mean_dxhat_xhat.array();
    dx.array().colwise() *= cache.inv_std.array();
    return dx;
  }

  template <typename List>
  void append_parameters(List& out) {
    out.push_back(&gain);
    out.push_back(&bias);
  }
  template <typename List>
  void append_parameters(List& out) const {
    out.push_back(&gain);
    out.push_back(&bias);
  }

  Parameter<Scalar> gain;
  Parameter<Scalar> bias;

 private:
  double epsilon_ = 1e-6;
};

extern template class LayerNorm<float>;
extern template class LayerNorm<double>;

}  // namespace mra::nn
