#pragma once

#include <span>
#include <string>
#include <vector>

#include "mra/image.hpp"
#include "mra/mae/config.hpp"
#include "mra/mae/position_embedding.hpp"
#include "mra/nn/transformer_block.hpp"
#include "mra/patches.hpp"

namespace mra::mae {

template <typename Scalar>
struct EncodeResult {
  Matrix<Scalar> latents;  // (|keep| + 1) x embed_dim, class token first
  nn::AttentionRecord<Scalar> attention;  // last encoder block
};

/// Vision-transformer masked autoencoder. The encoder embeds only the
/// visible patches (plus a class token); the decoder fills every hidden
/// position with one shared mask token and predicts the pixels of all
/// patches.
///
/// Batched entry points take one patch matrix and one visible set per
/// image; all visible sets in a batch must have the same size so tokens can
/// be stacked row-wise.
template <typename Scalar>
class MaskedAutoencoder {
 public:
  using BlockCache = typename nn::TransformerBlock<Scalar>::Cache;

  struct Cache {
    int batch = 0;
    int kept = 0;
    std::vector<TopKIndexSet> keeps;
    typename nn::Linear<Scalar>::Cache patch_embed;
    std::vector<BlockCache> encoder;
    typename nn::LayerNorm<Scalar>::Cache encoder_norm;
    typename nn::Linear<Scalar>::Cache decoder_embed;
    std::vector<BlockCache> decoder;
    typename nn::LayerNorm<Scalar>::Cache decoder_norm;
    typename nn::Linear<Scalar>::Cache decoder_pred;
  };

  MaskedAutoencoder() = default;

  explicit MaskedAutoencoder(const MaeConfig& config) : config_(config) {
    config.validate();
    geometry_ = config.geometry();
    const int pd = geometry_.patch_dim();
    const int d = config.embed_dim;
    const int dd = config.decoder_embed_dim;
    patch_embed = nn::Linear<Scalar>("patch_embed", pd, d);
    cls_token = nn::Parameter<Scalar>("cls_token", 1, d, false);
    for (int i = 0; i < config.encoder_layers; ++i) {
      encoder.emplace_back("encoder." + std::to_string(i), d, config.num_heads, config.mlp_ratio);
    }
    encoder_norm = nn::LayerNorm<Scalar>("encoder_norm", d);
    decoder_embed = nn::Linear<Scalar>("decoder_embed", d, dd);
    mask_token = nn::Parameter<Scalar>("mask_token", 1, dd, false);
    for (int i = 0; i < config.decoder_layers; ++i) {
      decoder.emplace_back("decoder." + std::to_string(i), dd, config.num_heads, config.mlp_ratio);
    }
    decoder_norm = nn::LayerNorm<Scalar>("decoder_norm", dd);
    decoder_pred = nn::Linear<Scalar>("decoder_pred", dd, pd);
    encoder_pos_ = sincos_position_embedding(d, geometry_.grid_h(), geometry_.grid_w())
                       .template cast<Scalar>();
    decoder_pos_ = sincos_position_embedding(dd, geometry_.grid_h(), geometry_.grid_w())
                       .template cast<Scalar>();
  }

  const MaeConfig& config() const { return config_; }
  const PatchGeometry& geometry() const { return geometry_; }

  /// Xavier-uniform linear weights, zero biases, N(0, 0.02) tokens.
  void init(Rng& rng) {
    constexpr auto kLinear = nn::LinearInit::xavier_uniform;
    patch_embed.init(rng, kLinear);
    nn::fill_truncated_normal(cls_token.value, rng, 0.02);
    for (auto& block : encoder) block.init(rng, kLinear);
    decoder_embed.init(rng, kLinear);
    nn::fill_truncated_normal(mask_token.value, rng, 0.02);
    for (auto& block : decoder) block.init(rng, kLinear);
    decoder_pred.init(rng, kLinear);
  }

  /// Encodes the visible patches of each image. Returns
  /// (batch * (kept + 1)) x embed_dim latents; row b * (kept + 1) is the
  /// class token of image b.
  Matrix<Scalar> encode_batch(std::span<const Matrix<Scalar>> patches,
                              std::span<const TopKIndexSet> keeps, Cache* cache = nullptr,
                              nn::AttentionRecord<Scalar>* record = nullptr) const {
    const int batch = check_batch(patches, keeps);
    const int kept = keeps.front().size();
    const int d = config_.embed_dim;
    const int seq = kept + 1;

    Matrix<Scalar> visible(Index(batch) * kept, geometry_.patch_dim());
    for (int b = 0; b < batch; ++b) {
      for (int j = 0; j < kept; ++j) {
        visible.row(Index(b) * kept + j) = patches[b].row(keeps[b].indices()[j]);
      }
    }
    const Matrix<Scalar> embedded = patch_embed.forward(visible, cache ? &cache->patch_embed : nullptr);

    Matrix<Scalar> tokens(Index(batch) * seq, d);
    for (int b = 0; b < batch; ++b) {
      tokens.row(Index(b) * seq) = cls_token.value.row(0);
      for (int j = 0; j < kept; ++j) {
        tokens.row(Index(b) * seq + 1 + j) =
            embedded.row(Index(b) * kept + j) + encoder_pos_.row(keeps[b].indices()[j]);
      }
    }
    if (cache) {
      cache->batch = batch;
      cache->kept = kept;
      cache->keeps.assign(keeps.begin(), keeps.end());
      cache->encoder.assign(encoder.size(), {});
    }
    for (std::size_t i = 0; i < encoder.size(); ++i) {
      const bool last = i + 1 == encoder.size();
      tokens = encoder[i].forward(tokens, seq, cache ? &cache->encoder[i] : nullptr,
                                  last ? record : nullptr);
    }
    if (record) record->full_visibility = kept == geometry_.num_patches();
    return encoder_norm.forward(tokens, cache ? &cache->encoder_norm : nullptr);
  }

  /// Decodes latents from encode_batch into raw per-patch pixel predictions,
  /// (batch * N) x patch_dim, unclamped.
  Matrix<Scalar> decode_batch(const Matrix<Scalar>& latents, std::span<const TopKIndexSet> keeps,
                              Cache* cache = nullptr) const {
    if (keeps.empty()) fail(ErrorKind::validation, "decode: empty batch");
    const int batch = static_cast<int>(keeps.size());
    const int kept = keeps.front().size();
    const int seq = kept + 1;
    const int n = geometry_.num_patches();
    if (latents.rows() != Index(batch) * seq || latents.cols() != config_.embed_dim) {
      fail(ErrorKind::validation,
           "decode: latents " + std::to_string(latents.rows()) + "x" +
               std::to_string(latents.cols()) + " do not match " + std::to_string(batch) +
               " images with " + std::to_string(kept) + " visible patches");
    }
    for (const auto& keep : keeps) {
      if (keep.size() != kept || keep.num_patches() != n) {
        fail(ErrorKind::validation, "decode: visible sets do not match the latents");
      }
    }

    Matrix<Scalar> visible_latents(Index(batch) * kept, config_.embed_dim);
    for (int b = 0; b < batch; ++b) {
      visible_latents.middleRows(Index(b) * kept, kept) = latents.middleRows(Index(b) * seq + 1, kept);
    }
    const Matrix<Scalar> projected =
        decoder_embed.forward(visible_latents, cache ? &cache->decoder_embed : nullptr);

    Matrix<Scalar> tokens(Index(batch) * n, config_.decoder_embed_dim);
    for (int b = 0; b < batch; ++b) {
      tokens.middleRows(Index(b) * n, n).rowwise() = mask_token.value.row(0);
      for (int j = 0; j < kept; ++j) {
        tokens.row(Index(b) * n + keeps[b].indices()[j]) = projected.row(Index(b) * kept + j);
      }
      tokens.middleRows(Index(b) * n, n) += decoder_pos_;
    }
    if (cache) cache->decoder.assign(decoder.size(), {});
    for (std::size_t i = 0; i < decoder.size(); ++i) {
      tokens = decoder[i].forward(tokens, n, cache ? &cache->decoder[i] : nullptr);
    }
    tokens = decoder_norm.forward(tokens, cache ? &cache->decoder_norm : nullptr);
    return decoder_pred.forward(tokens, cache ? &cache->decoder_pred : nullptr);
  }

  /// Accumulates parameter gradients given d(loss)/d(predictions).
  void backward(const Matrix<Scalar>& dpred, Cache& cache) {
    const int batch = cache.batch;
    const int kept = cache.kept;
    const int seq = kept + 1;
    const int n = geometry_.num_patches();

    Matrix<Scalar> d = decoder_pred.backward(dpred, cache.decoder_pred);
    d = decoder_norm.backward(d, cache.decoder_norm);
    for (std::size_t i = decoder.size(); i-- > 0;) d = decoder[i].backward(d, cache.decoder[i]);

    Matrix<Scalar> dprojected(Index(batch) * kept, config_.decoder_embed_dim);
    for (int b = 0; b < batch; ++b) {
      const auto& keep = cache.keeps[static_cast<std::size_t>(b)];
      for (int j = 0; j < kept; ++j) {
        dprojected.row(Index(b) * kept + j) = d.row(Index(b) * n + keep.indices()[j]);
      }
      for (int idx : keep.complement()) mask_token.grad.row(0) += d.row(Index(b) * n + idx);
    }
    const Matrix<Scalar> dvisible = decoder_embed.backward(dprojected, cache.decoder_embed);

    Matrix<Scalar> dlatents = Matrix<Scalar>::Zero(Index(batch) * seq, config_.embed_dim);
    for (int b = 0; b < batch; ++b) {
      dlatents.middleRows(Index(b) * seq + 1, kept) = dvisible.middleRows(Index(b) * kept, kept);
    }
    Matrix<Scalar> dtokens = encoder_norm.backward(dlatents, cache.encoder_norm);
    for (std::size_t i = encoder.size(); i-- > 0;) {
      dtokens = encoder[i].backward(dtokens, cache.encoder[i]);
    }
    Matrix<Scalar> dembedded(Index(batch) * kept, config_.embed_dim);
    for (int b = 0; b < batch; ++b) {
      cls_token.grad.row(0) += dtokens.row(Index(b) * seq);
      dembedded.middleRows(Index(b) * kept, kept) = dtokens.middleRows(Index(b) * seq + 1, kept);
    }
    patch_embed.backward(dembedded, cache.patch_embed);
  }

  /// Per-pixel targets for the loss (optionally per-patch normalized).
  Matrix<Scalar> loss_targets(const Matrix<Scalar>& patches) const {
    if (!config_.norm_pix_loss) return patches;
    Matrix<Scalar> out = patches;
    const Index cols = patches.cols();
    for (Index r = 0; r < out.rows(); ++r) {
      const Scalar mean = patches.row(r).mean();
      const Scalar var = cols > 1 ? (patches.row(r).array() - mean).square().sum() / Scalar(cols - 1)
                                  : Scalar(0);
      out.row(r) = (patches.row(r).array() - mean) / std::sqrt(var + Scalar(1e-6));
    }
    return out;
  }

  /// MSE between predictions and targets, over masked patches only or the
  /// whole image per config. With accumulate_grads, adds parameter gradients.
  Scalar reconstruction_loss(std::span<const Matrix<Scalar>> patches,
                             std::span<const TopKIndexSet> keeps, bool accumulate_grads) {
    Cache cache;
    const Matrix<Scalar> latents = encode_batch(patches, keeps, &cache);
    const Matrix<Scalar> pred = decode_batch(latents, keeps, &cache);
    const int n = geometry_.num_patches();
    const int batch = static_cast<int>(patches.size());
    Matrix<Scalar> target(pred.rows(), pred.cols());
    Matrix<Scalar> weights = Matrix<Scalar>::Zero(pred.rows(), pred.cols());
    for (int b = 0; b < batch; ++b) {
      target.middleRows(Index(b) * n, n) = loss_targets(patches[b]);
      if (config_.loss_support == LossSupport::whole_image) {
        weights.middleRows(Index(b) * n, n).setOnes();
      } else {
        for (int idx : keeps[b].complement()) weights.row(Index(b) * n + idx).setOnes();
      }
    }
    Matrix<Scalar> dpred;
    const Scalar loss =
        nn::mse_loss<Scalar>(pred, target, &weights, accumulate_grads ? &dpred : nullptr);
    if (accumulate_grads) backward(dpred, cache);
    return loss;
  }

  EncodeResult<Scalar> encode_visible(const Image& image, const TopKIndexSet& keep) const {
    const std::vector<Matrix<Scalar>> patches{patchify(image, geometry_).template cast<Scalar>()};
    const std::vector<TopKIndexSet> keeps{keep};
    EncodeResult<Scalar> result;
    result.latents = encode_batch(patches, keeps, nullptr, &result.attention);
    return result;
  }

  /// Full-image reconstruction from one image's latents, clamped to [0, 1].
  Image decode_full(const Matrix<Scalar>& latents, const TopKIndexSet& keep) const {
    const std::vector<TopKIndexSet> keeps{keep};
    const Matrix<Scalar> pred = decode_batch(latents, keeps);
    Image out = unpatchify(pred.template cast<float>(), geometry_);
    out.clamp_unit();
    return out;
  }

  /// Image handed out as the reconstruction of `image` from its `keep`
  /// patches. With masked-patch loss the decoder is never trained on
  /// visible positions, so those come from the input; with whole-image
  /// loss the decoder output is used everywhere.
  Image reconstruct(const Image& image, const TopKIndexSet& keep) const {
    Image out = decode_full(encode_visible(image, keep).latents, keep);
    if (config_.loss_support == LossSupport::masked_patches) {
      const int p = geometry_.patch_size();
      const int grid_w = geometry_.width() / p;
      for (int index : keep.indices()) {
        const int y0 = (index / grid_w) * p;
        const int x0 = (index % grid_w) * p;
        for (int y = y0; y < y0 + p; ++y)
          for (int x = x0; x < x0 + p; ++x)
            for (int c = 0; c < geometry_.channels(); ++c) out(y, x, c) = image(y, x, c);
      }
    }
    return out;
  }

  nn::ParameterList<Scalar> parameters() {
    nn::ParameterList<Scalar> out;
    append_parameters(*this, out);
    return out;
  }
  nn::ConstParameterList<Scalar> parameters() const {
    nn::ConstParameterList<Scalar> out;
    append_parameters(*this, out);
    return out;
  }

  nn::Linear<Scalar> patch_embed;
  nn::Parameter<Scalar> cls_token;
  std::vector<nn::TransformerBlock<Scalar>> encoder;
  nn::LayerNorm<Scalar> encoder_norm;
  nn::Linear<Scalar> decoder_embed;
  nn::Parameter<Scalar> mask_token;
  std::vector<nn::TransformerBlock<Scalar>> decoder;
  nn::LayerNorm<Scalar> decoder_norm;
  nn::Linear<Scalar> decoder_pred;

 private:
  template <typename Self, typename List>
  static void append_parameters(Self& self, List& out) {
    self.patch_embed.append_parameters(out);
    out.push_back(&self.cls_token);
    for (auto& block : self.encoder) block.append_parameters(out);
    self.encoder_norm.append_parameters(out);
    self.decoder_embed.append_parameters(out);
    out.push_back(&self.mask_token);
    for (auto& block : self.decoder) block.append_parameters(out);
    self.decoder_norm.append_parameters(out);
    self.decoder_pred.append_parameters(out);
  }

  int check_batch(std::span<const Matrix<Scalar>> patches, std::span<const TopKIndexSet> keeps) const {
    if (patches.empty() || patches.size() != keeps.size()) {
      fail(ErrorKind::validation, "encode: need one visible set per image");
    }
    const int kept = keeps.front().size();
    if (kept < 1) fail(ErrorKind::validation, "encode: at least one visible patch is required");
    for (std::size_t b = 0; b < patches.size(); ++b) {
      if (patches[b].rows() != geometry_.num_patches() ||
          patches[b].cols() != geometry_.patch_dim()) {
        fail(ErrorKind::geometry, "encode: patch matrix does not match model geometry");
      }
      if (keeps[b].num_patches() != geometry_.num_patches()) {
        fail(ErrorKind::validation, "encode: visible set built for a different grid");
      }
      if (keeps[b].size() != kept) {
        fail(ErrorKind::validation, "encode: visible sets in a batch must have equal size");
      }
    }
    return static_cast<int>(patches.size());
  }

  MaeConfig config_;
  PatchGeometry geometry_;
  Matrix<Scalar> encoder_pos_;
  Matrix<Scalar> decoder_pos_;
};

extern template class MaskedAutoencoder<float>;
extern template class MaskedAutoencoder<double>;

}  // namespace mra::mae
