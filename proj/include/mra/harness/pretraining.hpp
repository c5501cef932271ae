#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "mra/harness/metrics.hpp"
#include "mra/harness/run_config.hpp"
#include "mra/io/dataset.hpp"
#include "mra/io/output_dir.hpp"
#include "mra/mae/masked_autoencoder.hpp"

namespace mra::harness {

inline constexpr const char* kAutoencoderFile = "autoencoder.ckpt";
inline constexpr const char* kResumeFile = "checkpoint.ckpt";

struct PretrainOptions {
  std::optional<std::filesystem::path> resume;
  /// Stop (and write checkpoint.ckpt) once this many steps are done.
  std::optional<std::int64_t> stop_after;
};

struct PretrainResult {
  std::shared_ptr<mae::MaskedAutoencoder<float>> model;
  MetricsRecord metrics;
  std::vector<StepRecord> steps;
  std::int64_t completed_steps = 0;
  std::int64_t total_steps = 0;
  bool finished = false;
};

struct PretrainPlan {
  std::int64_t steps_per_epoch = 0;
  std::int64_t total_steps = 0;
  std::int64_t warmup_steps = 0;
};

PretrainPlan plan_pretraining(const RunConfig& config, int train_size);

/// Masked-reconstruction pretraining on the train split. Batch order comes
/// from (seed, epoch) and masks from (seed, step), so a run resumed from a
/// checkpoint continues exactly where the uninterrupted run would be.
PretrainResult run_pretraining(const RunConfig& config, const io::OutputDir& out, const io::Dataset& data,
                               const PretrainOptions& options = {});
PretrainResult run_pretraining(const RunConfig& config, const io::OutputDir& out,
                               const PretrainOptions& options = {});

}  // namespace mra::harness
