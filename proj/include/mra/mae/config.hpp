#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mra/patches.hpp"

namespace mra::mae {

enum class LossSupport { masked_patches, whole_image };

std::string_view to_string(LossSupport support);
LossSupport parse_loss_support(std::string_view name);

/// Architecture and masking configuration of the autoencoder.
struct MaeConfig {
  int image_size = 32;
  int channels = 3;
  int patch_size = 4;
  int encoder_layers = 4;
  int decoder_layers = 2;
  int embed_dim = 128;
  int decoder_embed_dim = 64;
  int num_heads = 4;
  int mlp_ratio = 4;
  double mask_ratio = 0.40;
  LossSupport loss_support = LossSupport::masked_patches;
  bool norm_pix_loss = false;

  // Throws ErrorKind::validation on any inconsistent field.
  void validate() const;
  PatchGeometry geometry() const { return {image_size, image_size, channels, patch_size}; }
  int num_patches() const { return (image_size / patch_size) * (image_size / patch_size); }

  friend bool operator==(const MaeConfig&, const MaeConfig&) = default;
};

// Known presets: "mae-mini-desk", "mae-base-desk", "mae-large-desk",
// "mae-tiny-test", "mae-mini" (224-pixel reference geometry).
MaeConfig mae_preset(std::string_view name);
std::vector<std::string> mae_preset_names();

nlohmann::json to_json(const MaeConfig& config);
MaeConfig mae_config_from_json(const nlohmann::json& j);

}  // namespace mra::mae
