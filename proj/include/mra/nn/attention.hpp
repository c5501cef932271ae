#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mra/nn/functional.hpp"
#include "mra/nn/linear.hpp"

namespace mra::nn {

/// Query/key activations of one attention layer, kept so the class-token
/// readout can be computed after the forward pass. Rows are tokens of
/// `batch` sequences of length `seq_len`; columns are heads * head_dim.
template <typename Scalar>
struct AttentionRecord {
  int batch = 0;
  int seq_len = 0;
  int num_heads = 0;
  int head_dim = 0;
  Matrix<Scalar> queries;
  Matrix<Scalar> keys;
  // Set by the encoder when every patch of the image was visible.
  bool full_visibility = false;

  bool empty() const { return queries.size() == 0; }
};

/// Multi-head scaled dot-product self-attention over batches of equal-length
/// sequences stacked row-wise.
template <typename Scalar>
class MultiHeadAttention {
 public:
  struct Cache {
    typename Linear<Scalar>::Cache qkv_cache;
    typename Linear<Scalar>::Cache proj_cache;
    Matrix<Scalar> qkv;
    std::vector<Matrix<Scalar>> probs;  // batch * heads, each seq x seq
    int seq_len = 0;
  };

  MultiHeadAttention() = default;
  MultiHeadAttention(const std::string& name, int dim, int num_heads)
      : qkv(name + ".qkv", dim, 3 * dim), proj(name + ".proj", dim, dim), num_heads_(num_heads) {
    if (num_heads < 1 || dim % num_heads != 0) {
      fail(ErrorKind::validation, name + ": embed dim must be divisible by head count");
    }
  }

  int dim() const { return qkv.in_features(); }
  int num_heads() const { return num_heads_; }
  int head_dim() const { return dim() / num_heads_; }

  void init(Rng& rng, double stddev = 0.02) {
    qkv.init(rng, stddev);
    proj.init(rng, stddev);
  }

  void init(Rng& rng, LinearInit scheme) {
    qkv.init(rng, scheme);
    proj.init(rng, scheme);
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& x, int seq_len, Cache* cache = nullptr,
                         AttentionRecord<Scalar>* record = nullptr) const {
    const int d = dim();
    const int hd = head_dim();
    if (seq_len < 1 || x.rows() % seq_len != 0) {
      fail(ErrorKind::validation, "attention: token count is not a multiple of sequence length");
    }
    const int batch = static_cast<int>(x.rows() / seq_len);
    const Scalar scale = Scalar(1) / std::sqrt(Scalar(hd));

    Matrix<Scalar> qkv_out = qkv.forward(x, cache ? &cache->qkv_cache : nullptr);
    Matrix<Scalar> mixed(x.rows(), d);
    if (cache) {
      cache->probs.assign(static_cast<std::size_t>(batch * num_heads_), {});
      cache->seq_len = seq_len;
    }
    for (int b = 0; b < batch; ++b) {
      for (int h = 0; h < num_heads_; ++h) {
        const auto q = qkv_out.block(Index(b) * seq_len, h * hd, seq_len, hd);
        const auto k = qkv_out.block(Index(b) * seq_len, d + h * hd, seq_len, hd);
        const auto v = qkv_out.block(Index(b) * seq_len, 2 * d + h * hd, seq_len, hd);
        Matrix<Scalar> probs = (q * k.transpose()) * scale;
        softmax_rows_inplace(probs);
        mixed.block(Index(b) * seq_len, h * hd, seq_len, hd).noalias() = probs * v;
        if (cache) cache->probs[static_cast<std::size_t>(b * num_heads_ + h)] = std::move(probs);
      }
    }
    if (record) {
      record->batch = batch;
      record->seq_len = seq_len;
      record->num_heads = num_heads_;
      record->head_dim = hd;
      record->queries = qkv_out.leftCols(d);
      record->keys = qkv_out.middleCols(d, d);
    }
    if (cache) cache->qkv = std::move(qkv_out);
    return proj.forward(mixed, cache ? &cache->proj_cache : nullptr);
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, const Cache& cache) {
    const int d = dim();
    const int hd = head_dim();
    const int seq_len = cache.seq_len;
    const int batch = static_cast<int>(dy.rows() / seq_len);
    const Scalar scale = Scalar(1) / std::sqrt(Scalar(hd));

    const Matrix<Scalar> dmixed = proj.backward(dy, cache.proj_cache);
    Matrix<Scalar> dqkv = Matrix<Scalar>::Zero(dy.rows(), 3 * d);
    for (int b = 0; b < batch; ++b) {
      const Index r0 = Index(b) * seq_len;
      for (int h = 0; h < num_heads_; ++h) {
        const auto& probs = cache.probs[static_cast<std::size_t>(b * num_heads_ + h)];
        const auto q = cache.qkv.block(r0, h * hd, seq_len, hd);
        const auto k = cache.qkv.block(r0, d + h * hd, seq_len, hd);
        const auto v = cache.qkv.block(r0, 2 * d + h * hd, seq_len, hd);
        const auto dout = dmixed.block(r0, h * hd, seq_len, hd);

        dqkv.block(r0, 2 * d + h * hd, seq_len, hd).noalias() = probs.transpose() * dout;
        Matrix<Scalar> dprobs = dout * v.transpose();
        const Vector<Scalar> row_dot = (dprobs.array() * probs.array()).rowwise().sum();
        Matrix<Scalar> dscores =
            (probs.array() * (dprobs.array().colwise() - row_dot.array())).matrix() * scale;
        dqkv.block(r0, h * hd, seq_len, hd).noalias() = dscores * k;
        dqkv.block(r0, d + h * hd, seq_len, hd).noalias() = dscores.transpose() * q;
      }
    }
    return qkv.backward(dqkv, cache.qkv_cache);
  }

  template <typename List>
  void append_parameters(List& out) {
    qkv.append_parameters(out);
    proj.append_parameters(out);
  }
  template <typename List>
  void append_parameters(List& out) const {
    qkv.append_parameters(out);
    proj.append_parameters(out);
  }

  Linear<Scalar> qkv;
  Linear<Scalar> proj;

 private:
  int num_heads_ = 1;
};

extern template class MultiHeadAttention<float>;
extern template class MultiHeadAttention<double>;

}  // namespace mra::nn
