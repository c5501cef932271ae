#pragma once

#include <string>

#include "mra/nn/attention.hpp"
#include "mra/nn/layer_norm.hpp"
#include "mra/nn/mlp.hpp"

namespace mra::nn {

/// Pre-norm transformer block: h = x + attn(ln1(x)); y = h + mlp(ln2(h)).
template <typename Scalar>
class TransformerBlock {
 public:
  struct Cache {
    typename LayerNorm<Scalar>::Cache ln1_cache;
    typename MultiHeadAttention<Scalar>::Cache attn_cache;
    typename LayerNorm<Scalar>::Cache ln2_cache;
    typename Mlp<Scalar>::Cache mlp_cache;
  };

  TransformerBlock() = default;
  TransformerBlock(const std::string& name, int dim, int num_heads, int mlp_ratio = 4)
      : ln1(name + ".ln1", dim),
        attn(name + ".attn", dim, num_heads),
        ln2(name + ".ln2", dim),
        mlp(name + ".mlp", dim, dim * mlp_ratio),
        name_(name) {}

  const std::string& name() const { return name_; }
  int dim() const { return attn.dim(); }

  void init(Rng& rng, double stddev = 0.02) {
    attn.init(rng, stddev);
    mlp.init(rng, stddev);
  }

  void init(Rng& rng, LinearInit scheme) {
    attn.init(rng, scheme);
    mlp.init(rng, scheme);
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& x, int seq_len, Cache* cache = nullptr,
                         AttentionRecord<Scalar>* record = nullptr) const {
    if (x.cols() != dim()) {
      fail(ErrorKind::validation, name_ + ": token width " + std::to_string(x.cols()) +
                                      " != embed dim " + std::to_string(dim()));
    }
    Matrix<Scalar> h = x + attn.forward(ln1.forward(x, cache ? &cache->ln1_cache : nullptr),
                                        seq_len, cache ? &cache->attn_cache : nullptr, record);
    Matrix<Scalar> y = h + mlp.forward(ln2.forward(h, cache ? &cache->ln2_cache : nullptr),
                                       cache ? &cache->mlp_cache : nullptr);
    if (!y.allFinite()) fail(ErrorKind::numeric, "non-finite activation in " + name_);
    return y;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, const Cache& cache) {
    Matrix<Scalar> dh = dy + ln2.backward(mlp.backward(dy, cache.mlp_cache), cache.ln2_cache);
    return dh + ln1.backward(attn.backward(dh, cache.attn_cache), cache.ln1_cache);
  }

  template <typename List>
  void append_parameters(List& out) {
    ln1.append_parameters(out);
    attn.append_parameters(out);
    ln2.append_parameters(out);
    mlp.append_parameters(out);
  }
  template <typename List>
  void append_parameters(List& out) const {
    ln1.append_parameters(out);
    attn.append_parameters(out);
    ln2.append_parameters(out);
    mlp.append_parameters(out);
  }

  LayerNorm<Scalar> ln1;
  MultiHeadAttention<Scalar> attn;
  LayerNorm<Scalar> ln2;
  Mlp<Scalar> mlp;

 private:
  std::string name_;
};

extern template class TransformerBlock<float>;
extern template class TransformerBlock<double>;

}  // namespace mra::nn
