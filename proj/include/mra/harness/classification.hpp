#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "mra/classify/resnet_mini.hpp"
#include "mra/harness/metrics.hpp"
#include "mra/harness/occlusion.hpp"
#include "mra/harness/run_config.hpp"
#include "mra/io/dataset.hpp"
#include "mra/io/output_dir.hpp"
#include "mra/mae/masked_autoencoder.hpp"

namespace mra::harness {

inline constexpr const char* kClassifierFile = "classifier.ckpt";

struct ClassificationResult {
  MetricsRecord metrics;
  std::shared_ptr<classify::ResNetMini<float>> model;
  std::int64_t augment_calls = 0;
  std::string augmentor_digest_before;
  std::string augmentor_digest_after;
  std::string probe_digest;
  std::optional<OcclusionCurve> occlusion;
};

/// Supervised training with the configured augmentor after crop/flip.
/// MRA arms use `autoencoder` when given, else the config's checkpoint.
ClassificationResult run_classification(const RunConfig& config, const io::OutputDir& out, const io::Dataset& data,
                                        std::shared_ptr<const mae::MaskedAutoencoder<float>> autoencoder = nullptr);
ClassificationResult run_classification(const RunConfig& config, const io::OutputDir& out);

/// SHA-256 over the augmented pixels of the first eval.probe_batch train
/// images, augmented with the run's augmentor and seed.
std::string probe_digest(const RunConfig& config, const io::Dataset& data,
                         std::shared_ptr<const mae::MaskedAutoencoder<float>> autoencoder);

}  // namespace mra::harness
