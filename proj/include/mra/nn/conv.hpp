#pragma once

#include <cmath>
#include <string>

#include "mra/nn/init.hpp"
#include "mra/nn/parameter.hpp"

namespace mra::nn {

/// Batch of feature maps stored channels x (batch * height * width); column
/// (b * height + y) * width + x holds the channel vector of one pixel.
template <typename Scalar>
struct FeatureBatch {
  Matrix<Scalar> data;
  int batch = 0;
  int channels = 0;
  int height = 0;
  int width = 0;

  FeatureBatch() = default;
  FeatureBatch(int b, int c, int h, int w)
      : data(Matrix<Scalar>::Zero(c, Index(b) * h * w)), batch(b), channels(c), height(h), width(w) {}

  Index column(int b, int y, int x) const { return (Index(b) * height + y) * width + x; }
};

/// Square-kernel 2-D convolution with zero padding, lowered to one GEMM over
/// an im2col matrix. Column rows are ordered (ky, kx, channel).
template <typename Scalar>
class Conv2d {
 public:
  struct Cache {
    Matrix<Scalar> columns;
    int batch = 0;
    int in_height = 0;
    int in_width = 0;
  };

  Conv2d() = default;
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
         int padding)
      : weight(name + ".weight", out_channels, Index(kernel) * kernel * in_channels, true),
        bias(name + ".bias", out_channels, 1, false),
        in_channels_(in_channels),
        kernel_(kernel),
        stride_(stride),
        padding_(padding) {}

  int in_channels() const { return in_channels_; }
  int out_channels() const { return static_cast<int>(weight.value.rows()); }
  int output_size(int input) const { return (input + 2 * padding_ - kernel_) / stride_ + 1; }

  // He-normal initialization for ReLU networks.
  void init(Rng& rng, double gain = 1.0) {
    fill_normal(weight.value, rng, gain * std::sqrt(2.0 / double(weight.value.cols())));
    bias.value.setZero();
  }

  FeatureBatch<Scalar> forward(const FeatureBatch<Scalar>& x, Cache* cache = nullptr) const {
    if (x.channels != in_channels_) {
      fail(ErrorKind::validation, weight.name + ": expected " + std::to_string(in_channels_) +
                                      " input channels, got " + std::to_string(x.channels));
    }
    Matrix<Scalar> columns = im2col(x);
    FeatureBatch<Scalar> y;
    y.batch = x.batch;
    y.channels = out_channels();
    y.height = output_size(x.height);
    y.width = output_size(x.width);
    y.data.noalias() = weight.value * columns;
    y.data.colwise() += bias.value.col(0);
    if (cache) {
      cache->columns = std::move(columns);
      cache->batch = x.batch;
      cache->in_height = x.height;
      cache->in_width = x.width;
    }
    return y;
  }

  FeatureBatch<Scalar> backward(const FeatureBatch<Scalar>& dy, const Cache& cache) {
    weight.grad.noalias() += dy.data * cache.columns.transpose();
    bias.grad.col(0) += dy.data.rowwise().sum();
    const Matrix<Scalar> dcolumns = weight.value.transpose() * dy.data;
    return col2im(dcolumns, cache.batch, cache.in_height, cache.in_width);
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

 private:
  Matrix<Scalar> im2col(const FeatureBatch<Scalar>& x) const {
    const int oh = output_size(x.height);
    const int ow = output_size(x.width);
    const int c = in_channels_;
    Matrix<Scalar> columns = Matrix<Scalar>::Zero(Index(kernel_) * kernel_ * c, Index(x.batch) * oh * ow);
    for (int b = 0; b < x.batch; ++b) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          Scalar* dst = columns.col((Index(b) * oh + oy) * ow + ox).data();
          for (int ky = 0; ky < kernel_; ++ky) {
            const int iy = oy * stride_ - padding_ + ky;
            if (iy < 0 || iy >= x.height) continue;
            for (int kx = 0; kx < kernel_; ++kx) {
              const int ix = ox * stride_ - padding_ + kx;
              if (ix < 0 || ix >= x.width) continue;
              const Scalar* src = x.data.col(x.column(b, iy, ix)).data();
              std::copy(src, src + c, dst + (ky * kernel_ + kx) * c);
            }
          }
        }
      }
    }
    return columns;
  }

  FeatureBatch<Scalar> col2im(const Matrix<Scalar>& columns, int batch, int height,
                              int width) const {
    const int oh = output_size(height);
    const int ow = output_size(width);
    const int c = in_channels_;
    FeatureBatch<Scalar> dx(batch, c, height, width);
    for (int b = 0; b < batch; ++b) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const Scalar* src = columns.col((Index(b) * oh + oy) * ow + ox).data();
          for (int ky = 0; ky < kernel_; ++ky) {
            const int iy = oy * stride_ - padding_ + ky;
            if (iy < 0 || iy >= height) continue;
            for (int kx = 0; kx < kernel_; ++kx) {
              const int ix = ox * stride_ - padding_ + kx;
              if (ix < 0 || ix >= width) continue;
              Scalar* dst = dx.data.col(dx.column(b, iy, ix)).data();
              const Scalar* s = src + (ky * kernel_ + kx) * c;
              for (int ch = 0; ch < c; ++ch) dst[ch] += s[ch];
            }
          }
        }
      }
    }
    return dx;
  }

  int in_channels_ = 0;
  int kernel_ = 3;
  int stride_ = 1;
  int padding_ = 1;
};

template <typename Scalar>
FeatureBatch<Scalar> relu(FeatureBatch<Scalar> x) {
  x.data = x.data.cwiseMax(Scalar(0));
  return x;
}

// Gradient of relu given its output.
template <typename Scalar>
FeatureBatch<Scalar> relu_backward(FeatureBatch<Scalar> dy, const FeatureBatch<Scalar>& output) {
  dy.data = (output.data.array() > Scalar(0)).select(dy.data, Scalar(0));
  return dy;
}

/// Mean over each sample's spatial positions: returns batch x channels.
template <typename Scalar>
Matrix<Scalar> global_average_pool(const FeatureBatch<Scalar>& x) {
  const Index hw = Index(x.height) * x.width;
  Matrix<Scalar> pooled(x.batch, x.channels);
  for (int b = 0; b < x.batch; ++b) {
    pooled.row(b) = x.data.middleCols(Index(b) * hw, hw).rowwise().mean().transpose();
  }
  return pooled;
}

template <typename Scalar>
FeatureBatch<Scalar> global_average_pool_backward(const Matrix<Scalar>& dpooled, int batch,
                                                  int channels, int height, int width) {
  FeatureBatch<Scalar> dx(batch, channels, height, width);
  const Index hw = Index(height) * width;
  for (int b = 0; b < batch; ++b) {
    dx.data.middleCols(Index(b) * hw, hw).colwise() =
        dpooled.row(b).transpose() / Scalar(hw);
  }
  return dx;
}

extern template class Conv2d<float>;
extern template class Conv2d<double>;

}  // namespace mra::nn
