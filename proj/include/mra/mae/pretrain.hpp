#pragma once

#include <span>

#include "mra/image.hpp"
#include "mra/mae/masked_autoencoder.hpp"
#include "mra/nn/optimizer.hpp"
#include "mra/random.hpp"

namespace mra::mae {

/// One optimization step of masked-reconstruction pretraining. Each image
/// gets a fresh random mask drawn from `rng` at the configured ratio.
/// Returns the batch loss; a non-finite loss throws ErrorKind::numeric
/// before the optimizer is touched.
double pretrain_step(MaskedAutoencoder<float>& model, nn::Optimizer<float>& optimizer,
                     std::span<const Image> batch, Rng& rng);

}  // namespace mra::mae
