#include "mra/augment/registry.hpp"

#include "mra/error.hpp"

namespace mra::augment {

std::string_view to_string(AugmentorKind kind) {
  switch (kind) {
    case AugmentorKind::none: return "none";
    case AugmentorKind::cutout: return "cutout";
    case AugmentorKind::mixup: return "mixup";
    case AugmentorKind::cutmix: return "cutmix";
    case AugmentorKind::mra: return "mra";
    case AugmentorKind::mra_mask_only: return "mra_mask_only";
    case AugmentorKind::mra_cutmix: return "mra+cutmix";
  }
  return "unknown";
}

AugmentorKind parse_augmentor_kind(std::string_view name) {
  for (auto kind : {AugmentorKind::none, AugmentorKind::cutout, AugmentorKind::mixup,
                    AugmentorKind::cutmix, AugmentorKind::mra, AugmentorKind::mra_mask_only,
                    AugmentorKind::mra_cutmix}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorKind::config, "unknown augmentor '" + std::string(name) + "'");
}

std::vector<std::string> augmentor_names() {
  return {"none", "cutout", "mixup", "cutmix", "mra", "mra_mask_only", "mra+cutmix"};
}

bool needs_autoencoder(AugmentorKind kind) {
  return kind == AugmentorKind::mra || kind == AugmentorKind::mra_mask_only ||
         kind == AugmentorKind::mra_cutmix;
}

bool mixes_pairs(AugmentorKind kind) {
  return kind == AugmentorKind::mixup || kind == AugmentorKind::cutmix ||
         kind == AugmentorKind::mra_cutmix;
}

}  // namespace mra::augment
