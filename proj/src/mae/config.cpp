#include "mra/mae/config.hpp"

#include "mra/error.hpp"

namespace mra::mae {

std::string_view to_string(LossSupport support) {
  return support == LossSupport::masked_patches ? "masked" : "all";
}

LossSupport parse_loss_support(std::string_view name) {
  if (name == "masked") return LossSupport::masked_patches;
  if (name == "all") return LossSupport::whole_image;
  fail(ErrorKind::config, "unknown loss support '" + std::string(name) + "' (expected masked|all)");
}

void MaeConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::validation, "invalid autoencoder config: " + what);
  };
  check(image_size >= 1 && channels >= 1 && patch_size >= 1, "sizes must be >= 1");
  check(image_size % patch_size == 0, "patch size must divide image size");
  check(encoder_layers >= 1 && decoder_layers >= 1, "layer counts must be >= 1");
  check(num_heads >= 1 && mlp_ratio >= 1, "head count and mlp ratio must be >= 1");
  check(embed_dim % num_heads == 0 && decoder_embed_dim % num_heads == 0,
        "embed dims must be divisible by the head count");
  check(embed_dim % 4 == 0 && decoder_embed_dim % 4 == 0,
        "embed dims must be divisible by 4 for the 2-D sine-cosine table");
  check(mask_ratio >= 0.0 && mask_ratio < 1.0, "mask ratio must lie in [0, 1)");
}

MaeConfig mae_preset(std::string_view name) {
  MaeConfig c;
  if (name == "mae-mini-desk") return c;
  if (name == "mae-base-desk") {
    c.encoder_layers = 12;
    c.decoder_layers = 8;
    c.embed_dim = 192;
    c.decoder_embed_dim = 128;
    c.mask_ratio = 0.75;
    return c;
  }
  if (name == "mae-large-desk") {
    c.encoder_layers = 12;
    c.decoder_layers = 8;
    c.embed_dim = 256;
    c.decoder_embed_dim = 128;
    c.num_heads = 8;
    c.mask_ratio = 0.75;
    return c;
  }
  if (name == "mae-tiny-test") {
    c.encoder_layers = 2;
    c.decoder_layers = 1;
    c.embed_dim = 32;
    c.decoder_embed_dim = 16;
    c.num_heads = 2;
    c.mlp_ratio = 2;
    return c;
  }
  if (name == "mae-mini") {
    c.image_size = 224;
    c.patch_size = 16;
    c.embed_dim = 480;
    c.decoder_embed_dim = 480;
    c.num_heads = 8;
    return c;
  }
  fail(ErrorKind::config, "unknown autoencoder preset '" + std::string(name) + "'");
}

std::vector<std::string> mae_preset_names() {
  return {"mae-mini-desk", "mae-base-desk", "mae-large-desk", "mae-tiny-test", "mae-mini"};
}

nlohmann::json to_json(const MaeConfig& c) {
  return {{"image_size", c.image_size},
          {"channels", c.channels},
          {"patch_size", c.patch_size},
          {"encoder_layers", c.encoder_layers},
          {"decoder_layers", c.decoder_layers},
          {"embed_dim", c.embed_dim},
          {"decoder_embed_dim", c.decoder_embed_dim},
          {"num_heads", c.num_heads},
          {"mlp_ratio", c.mlp_ratio},
          {"mask_ratio", c.mask_ratio},
          {"loss_support", std::string(to_string(c.loss_support))},
          {"norm_pix_loss", c.norm_pix_loss}};
}

MaeConfig mae_config_from_json(const nlohmann::json& j) {
  try {
    MaeConfig c;
    c.image_size = j.at("image_size").get<int>();
    c.channels = j.at("channels").get<int>();
    c.patch_size = j.at("patch_size").get<int>();
    c.encoder_layers = j.at("encoder_layers").get<int>();
    c.decoder_layers = j.at("decoder_layers").get<int>();
    c.embed_dim = j.at("embed_dim").get<int>();
    c.decoder_embed_dim = j.at("decoder_embed_dim").get<int>();
    c.num_heads = j.at("num_heads").get<int>();
    c.mlp_ratio = j.at("mlp_ratio").get<int>();
    c.mask_ratio = j.at("mask_ratio").get<double>();
    c.loss_support = parse_loss_support(j.at("loss_support").get<std::string>());
    c.norm_pix_loss = j.at("norm_pix_loss").get<bool>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::schema, std::string("autoencoder config: ") + e.what());
  }
}

}  // namespace mra::mae
