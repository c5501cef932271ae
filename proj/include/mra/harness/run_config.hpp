#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mra/augment/registry.hpp"
#include "mra/masking/attention_masking.hpp"
#include "mra/nn/optimizer.hpp"

namespace mra::harness {

inline constexpr int kRunConfigSchemaVersion = 1;

struct DataConfig {
  std::string source;
  int train_size = 0;
  int eval_size = 0;
  int image_size = 0;
  int num_classes = 0;
};

struct PretrainConfig {
  int epochs = 200;
  int batch_size = 32;
  std::optional<std::int64_t> max_steps;
  double mask_ratio = 0.4;
  std::string loss_support = "masked";
  bool norm_pix_loss = false;
  nn::OptimizerConfig optimizer;
  double min_learning_rate = 0.0;
  double warmup_fraction = 0.05;
  std::int64_t checkpoint_every = 0;
};

enum class LrSchedule { step, cosine, constant };

struct ClassifyConfig {
  int epochs = 30;
  int batch_size = 64;
  nn::OptimizerConfig optimizer;
  LrSchedule schedule = LrSchedule::step;
  std::string classifier = "resnet-mini-desk";
  int crop_padding = 4;
  bool flip = true;
};

struct AugmentConfig {
  augment::AugmentorKind augmentor = augment::AugmentorKind::none;
  masking::MaskStrategy strategy = masking::MaskStrategy::mask_low;
  std::optional<double> mask_ratio;  // unset: reuse the pretraining ratio
  double apply_probability = 1.0;
  masking::ScoreOptions scoring;
  int cutout_hole = 16;
  double mixup_alpha = 0.2;
  double cutmix_alpha = 1.0;

  double effective_mask_ratio(double pretrain_ratio) const {
    return mask_ratio.value_or(pretrain_ratio);
  }
};

struct EvalConfig {
  std::vector<int> occlusion_hole_sizes;  // empty: 9 evenly spaced sizes from 0 to the side
  bool occlusion_after_train = true;
  int probe_batch = 8;
};

enum class AblationSuite { mask_ratio, mask_strategy, reconstruction, pretrain_epochs, model_size };

std::string_view to_string(AblationSuite suite);
AblationSuite parse_ablation_suite(std::string_view name);
std::vector<std::string> ablation_suite_names();

struct AblationConfig {
  AblationSuite suite = AblationSuite::mask_strategy;
  std::vector<std::uint64_t> seeds;
  std::vector<double> mask_ratios;
  std::vector<int> pretrain_epochs;
  std::vector<std::string> model_presets;
};

/// Typed view of a validated, fully materialized run configuration. The
/// JSON document is the source of truth; the fields mirror it.
struct RunConfig {
  nlohmann::json document;

  std::string task;
  std::uint64_t seed = 0;
  bool deterministic = true;
  std::string output_dir;
  std::optional<std::string> checkpoint;
  std::string model_preset;
  DataConfig data;
  PretrainConfig pretrain;
  ClassifyConfig classify;
  AugmentConfig augment;
  EvalConfig eval;
  AblationConfig ablation;

  /// SHA-256 of the canonical document without output_dir, so the same
  /// experiment written to two places hashes identically.
  std::string hash() const;
};

nlohmann::json default_run_config();

/// Rejects unknown keys and mistyped values (ErrorKind::config), fills in
/// defaults, then checks ranges and names.
RunConfig parse_run_config(const nlohmann::json& user);
RunConfig load_run_config(const std::filesystem::path& path);

/// Sets a dotted key ("augment.strategy") in a config document.
void set_config_value(nlohmann::json& document, std::string_view dotted_key, nlohmann::json value);
RunConfig with_value(const RunConfig& config, std::string_view dotted_key, nlohmann::json value);

/// Dotted keys whose values differ between two documents.
std::vector<std::string> diff_keys(const nlohmann::json& a, const nlohmann::json& b);

}  // namespace mra::harness
