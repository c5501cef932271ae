#include "mra/mae/pretrain.hpp"

#include <cmath>

#include "mra/mae/random_mask.hpp"

namespace mra::mae {

template class MaskedAutoencoder<float>;
template class MaskedAutoencoder<double>;

double pretrain_step(MaskedAutoencoder<float>& model, nn::Optimizer<float>& optimizer,
                     std::span<const Image> batch, Rng& rng) {
  if (batch.empty()) fail(ErrorKind::validation, "pretrain_step: empty batch");
  const auto& geometry = model.geometry();
  std::vector<Matrix<float>> patches;
  std::vector<TopKIndexSet> keeps;
  patches.reserve(batch.size());
  keeps.reserve(batch.size());
  for (const auto& image : batch) {
    patches.push_back(patchify(image, geometry));
    keeps.push_back(sample_random_mask(geometry.num_patches(), model.config().mask_ratio, rng));
  }
  auto params = model.parameters();
  nn::zero_grads(params);
  const float loss = model.reconstruction_loss(patches, keeps, true);
  if (!std::isfinite(loss)) fail(ErrorKind::numeric, "non-finite reconstruction loss");
  optimizer.step(params);
  return loss;
}

}  // namespace mra::mae
