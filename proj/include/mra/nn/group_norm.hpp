#pragma once

#include <cmath>
#include <string>

#include "mra/nn/conv.hpp"

namespace mra::nn {

/// Normalizes each sample's feature maps over groups of channels (and all
/// spatial positions), then applies a per-channel gain and bias. Statistics
/// never mix samples, so training and inference compute the same function.
template <typename Scalar>
class GroupNorm {
 public:
  struct Cache {
    Matrix<Scalar> normalized;
    Matrix<Scalar> inv_std;  // groups x batch
  };

  GroupNorm() = default;
  GroupNorm(const std::string& name, int channels, int groups, double epsilon = 1e-5)
      : gain(name + ".gain", channels, 1, false),
        bias(name + ".bias", channels, 1, false),
        groups_(groups),
        epsilon_(epsilon) {
    if (groups < 1 || channels % groups != 0) {
      fail(ErrorKind::validation, name + ": " + std::to_string(channels) + " channels do not split into " +
                                      std::to_string(groups) + " groups");
    }
    gain.value.setOnes();
  }

  int groups() const { return groups_; }

  FeatureBatch<Scalar> forward(const FeatureBatch<Scalar>& x, Cache* cache = nullptr) const {
    if (x.channels != gain.value.rows()) fail(ErrorKind::validation, gain.name + ": channel count mismatch");
    const int per_group = x.channels / groups_;
    const Index hw = Index(x.height) * x.width;
    FeatureBatch<Scalar> y = x;
    Matrix<Scalar> inv_std(groups_, x.batch);
    for (int b = 0; b < x.batch; ++b) {
      for (int g = 0; g < groups_; ++g) {
        auto block = y.data.block(Index(g) * per_group, Index(b) * hw, per_group, hw);
        const Scalar mean = block.mean();
        block.array() -= mean;
        const Scalar inv = Scalar(1) / std::sqrt(block.array().square().mean() + Scalar(epsilon_));
        block *= inv;
        inv_std(g, b) = inv;
      }
    }
    if (cache) {
      cache->normalized = y.data;
      cache->inv_std = std::move(inv_std);
    }
    y.data.array().colwise() *= gain.value.col(0).array();
    y.data.colwise() += bias.value.col(0);
    return y;
  }

  FeatureBatch<Scalar> backward(const FeatureBatch<Scalar>& dy, const Cache& cache) {
    const auto& xhat = cache.normalized;
    gain.grad.col(0) += (dy.data.array() * xhat.array()).rowwise().sum().matrix();
    bias.grad.col(0) += dy.data.rowwise().sum();
    FeatureBatch<Scalar> dx = dy;
    dx.data.array().colwise() *= gain.value.col(0).array();
    const int per_group = dy.channels / groups_;
    const Index hw = Index(dy.height) * dy.width;
    for (int b = 0; b < dy.batch; ++b) {
      for (int g = 0; g < groups_; ++g) {
        const Index r0 = Index(g) * per_group;
        const Index c0 = Index(b) * hw;
        auto d = dx.data.block(r0, c0, per_group, hw);
        const auto xh = xhat.block(r0, c0, per_group, hw);
        const Scalar mean_d = d.mean();
        const Scalar mean_dx = (d.array() * xh.array()).mean();
        d = ((d.array() - mean_d - xh.array() * mean_dx) * cache.inv_std(g, b)).matrix();
      }
    }
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
  int groups_ = 1;
  double epsilon_ = 1e-5;
};

extern template class GroupNorm<float>;
extern template class GroupNorm<double>;

}  // namespace mra::nn
