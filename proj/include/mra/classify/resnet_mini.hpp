#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mra/image.hpp"
#include "mra/nn/conv.hpp"
#include "mra/nn/group_norm.hpp"
#include "mra/nn/linear.hpp"

namespace mra::classify {

struct ClassifierConfig {
  int image_size = 32;
  int channels = 3;
  int num_classes = 10;
  int width1 = 32;
  int width2 = 64;
  int width3 = 128;

  void validate() const;
  friend bool operator==(const ClassifierConfig&, const ClassifierConfig&) = default;
};

// Widths must be multiples of kNormGroups.
// "resnet-mini-desk" (32/64/128, ~0.3M parameters), "resnet-mini-small"
// (16/32/64), "resnet-mini-tiny" (8/16/32).
ClassifierConfig classifier_preset(std::string_view name, int image_size, int channels,
                                   int num_classes);

nlohmann::json to_json(const ClassifierConfig& config);
ClassifierConfig classifier_config_from_json(const nlohmann::json& j);

/// Images in [0,1] to a (x - 0.5) / 0.25 normalized feature batch.
template <typename Scalar>
nn::FeatureBatch<Scalar> to_feature_batch(std::span<const Image> images);

inline constexpr int kNormGroups = 4;

/// conv-norm-relu-conv-norm plus identity (or 1x1 conv-norm projection)
/// shortcut, then relu.
template <typename Scalar>
class BasicBlock {
 public:
  struct Cache {
    typename nn::Conv2d<Scalar>::Cache conv1_cache;
    typename nn::GroupNorm<Scalar>::Cache norm1_cache;
    typename nn::Conv2d<Scalar>::Cache conv2_cache;
    typename nn::GroupNorm<Scalar>::Cache norm2_cache;
    typename nn::Conv2d<Scalar>::Cache shortcut_cache;
    typename nn::GroupNorm<Scalar>::Cache shortcut_norm_cache;
    nn::FeatureBatch<Scalar> hidden;
    nn::FeatureBatch<Scalar> output;
  };

  BasicBlock() = default;
  BasicBlock(const std::string& name, int in_channels, int out_channels, int stride)
      : conv1(name + ".conv1", in_channels, out_channels, 3, stride, 1),
        norm1(name + ".norm1", out_channels, kNormGroups),
        conv2(name + ".conv2", out_channels, out_channels, 3, 1, 1),
        norm2(name + ".norm2", out_channels, kNormGroups) {
    if (stride != 1 || in_channels != out_channels) {
      shortcut.emplace(name + ".shortcut", in_channels, out_channels, 1, stride, 0);
      shortcut_norm.emplace(name + ".shortcut_norm", out_channels, kNormGroups);
    }
  }

  void init(Rng& rng) {
    conv1.init(rng);
    conv2.init(rng);
    if (shortcut) shortcut->init(rng);
  }

  nn::FeatureBatch<Scalar> forward(const nn::FeatureBatch<Scalar>& x, Cache* cache = nullptr) const {
    nn::FeatureBatch<Scalar> hidden = nn::relu(norm1.forward(conv1.forward(x, cache ? &cache->conv1_cache : nullptr),
                                                             cache ? &cache->norm1_cache : nullptr));
    nn::FeatureBatch<Scalar> out = norm2.forward(conv2.forward(hidden, cache ? &cache->conv2_cache : nullptr),
                                                 cache ? &cache->norm2_cache : nullptr);
    if (shortcut) {
      out.data += shortcut_norm
                      ->forward(shortcut->forward(x, cache ? &cache->shortcut_cache : nullptr),
                                cache ? &cache->shortcut_norm_cache : nullptr)
                      .data;
    } else {
      out.data += x.data;
    }
    out = nn::relu(std::move(out));
    if (cache) {
      cache->hidden = std::move(hidden);
      cache->output = out;
    }
    return out;
  }

  nn::FeatureBatch<Scalar> backward(const nn::FeatureBatch<Scalar>& dy, const Cache& cache) {
    const nn::FeatureBatch<Scalar> dsum = nn::relu_backward(dy, cache.output);
    nn::FeatureBatch<Scalar> dhidden = nn::relu_backward(
        conv2.backward(norm2.backward(dsum, cache.norm2_cache), cache.conv2_cache), cache.hidden);
    nn::FeatureBatch<Scalar> dx = conv1.backward(norm1.backward(dhidden, cache.norm1_cache), cache.conv1_cache);
    if (shortcut) {
      dx.data += shortcut->backward(shortcut_norm->backward(dsum, cache.shortcut_norm_cache), cache.shortcut_cache).data;
    } else {
      dx.data += dsum.data;
    }
    return dx;
  }

  template <typename List>
  void append_parameters(List& out) {
    append(*this, out);
  }
  template <typename List>
  void append_parameters(List& out) const {
    append(*this, out);
  }

  nn::Conv2d<Scalar> conv1;
  nn::GroupNorm<Scalar> norm1;
  nn::Conv2d<Scalar> conv2;
  nn::GroupNorm<Scalar> norm2;
  std::optional<nn::Conv2d<Scalar>> shortcut;
  std::optional<nn::GroupNorm<Scalar>> shortcut_norm;

 private:
  template <typename Self, typename List>
  static void append(Self& self, List& out) {
    self.conv1.append_parameters(out);
    self.norm1.append_parameters(out);
    self.conv2.append_parameters(out);
    self.norm2.append_parameters(out);
    if (self.shortcut) {
      self.shortcut->append_parameters(out);
      self.shortcut_norm->append_parameters(out);
    }
  }
};

/// Stem conv-norm, three residual stages (strides 1, 2, 2), global average
/// pool, linear head.
template <typename Scalar>
class ResNetMini {
 public:
  struct Cache {
    typename nn::Conv2d<Scalar>::Cache stem_cache;
    typename nn::GroupNorm<Scalar>::Cache stem_norm_cache;
    nn::FeatureBatch<Scalar> stem_output;
    typename BasicBlock<Scalar>::Cache stage_cache[3];
    int pooled_height = 0;
    int pooled_width = 0;
    typename nn::Linear<Scalar>::Cache head_cache;
  };

  ResNetMini() = default;
  explicit ResNetMini(const ClassifierConfig& config)
      : stem("stem", config.channels, config.width1, 3, 1, 1),
        stem_norm("stem_norm", config.width1, kNormGroups),
        stages{BasicBlock<Scalar>("stage1", config.width1, config.width1, 1),
               BasicBlock<Scalar>("stage2", config.width1, config.width2, 2),
               BasicBlock<Scalar>("stage3", config.width2, config.width3, 2)},
        head("head", config.width3, config.num_classes),
        config_(config) {
    config.validate();
  }

  const ClassifierConfig& config() const { return config_; }

  void init(Rng& rng) {
    stem.init(rng);
    for (auto& stage : stages) stage.init(rng);
    head.init(rng, 0.01);
  }

  Matrix<Scalar> forward(const nn::FeatureBatch<Scalar>& x, Cache* cache = nullptr) const {
    nn::FeatureBatch<Scalar> h = nn::relu(stem_norm.forward(stem.forward(x, cache ? &cache->stem_cache : nullptr),
                                                            cache ? &cache->stem_norm_cache : nullptr));
    if (cache) cache->stem_output = h;
    for (int i = 0; i < 3; ++i) h = stages[i].forward(h, cache ? &cache->stage_cache[i] : nullptr);
    if (cache) {
      cache->pooled_height = h.height;
      cache->pooled_width = h.width;
    }
    return head.forward(nn::global_average_pool(h), cache ? &cache->head_cache : nullptr);
  }

  void backward(const Matrix<Scalar>& dlogits, Cache& cache) {
    const Matrix<Scalar> dpooled = head.backward(dlogits, cache.head_cache);
    nn::FeatureBatch<Scalar> d = nn::global_average_pool_backward(
        dpooled, static_cast<int>(dlogits.rows()), config_.width3, cache.pooled_height,
        cache.pooled_width);
    for (int i = 2; i >= 0; --i) d = stages[i].backward(d, cache.stage_cache[i]);
    d = nn::relu_backward(std::move(d), cache.stem_output);
    stem.backward(stem_norm.backward(d, cache.stem_norm_cache), cache.stem_cache);
  }

  std::vector<int> predict(std::span<const Image> images) const;

  nn::ParameterList<Scalar> parameters() {
    nn::ParameterList<Scalar> out;
    append(*this, out);
    return out;
  }
  nn::ConstParameterList<Scalar> parameters() const {
    nn::ConstParameterList<Scalar> out;
    append(*this, out);
    return out;
  }

  nn::Conv2d<Scalar> stem;
  nn::GroupNorm<Scalar> stem_norm;
  BasicBlock<Scalar> stages[3];
  nn::Linear<Scalar> head;

 private:
  template <typename Self, typename List>
  static void append(Self& self, List& out) {
    self.stem.append_parameters(out);
    self.stem_norm.append_parameters(out);
    for (auto& stage : self.stages) stage.append_parameters(out);
    self.head.append_parameters(out);
  }

  ClassifierConfig config_;
};

extern template class BasicBlock<float>;
extern template class BasicBlock<double>;
extern template class ResNetMini<float>;
extern template class ResNetMini<double>;

}  // namespace mra::classify
