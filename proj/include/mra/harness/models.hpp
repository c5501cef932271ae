#pragma once

#include <filesystem>
#include <memory>

#include "mra/classify/resnet_mini.hpp"
#include "mra/harness/run_config.hpp"
#include "mra/io/checkpoint.hpp"
#include "mra/io/dataset.hpp"
#include "mra/mae/masked_autoencoder.hpp"

namespace mra::harness {

inline constexpr const char* kMaeKind = "mae";
inline constexpr const char* kClassifierKind = "classifier";

/// Preset architecture adapted to the dataset's image side and channel
/// count, with the pretraining mask ratio and loss settings applied.
mae::MaeConfig autoencoder_config(const RunConfig& config, const io::Dataset& data);

classify::ClassifierConfig classifier_config(const RunConfig& config, const io::Dataset& data);

io::Checkpoint autoencoder_checkpoint(const mae::MaskedAutoencoder<float>& model);
std::shared_ptr<mae::MaskedAutoencoder<float>> autoencoder_from_checkpoint(const io::Checkpoint& ckpt);
std::shared_ptr<mae::MaskedAutoencoder<float>> load_autoencoder(const std::filesystem::path& path);

io::Checkpoint classifier_checkpoint(const classify::ResNetMini<float>& model);
classify::ResNetMini<float> classifier_from_checkpoint(const io::Checkpoint& ckpt);

io::Dataset load_run_dataset(const RunConfig& config);

}  // namespace mra::harness
