#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mra::augment {

enum class AugmentorKind { none, cutout, mixup, cutmix, mra, mra_mask_only, mra_cutmix };

std::string_view to_string(AugmentorKind kind);
AugmentorKind parse_augmentor_kind(std::string_view name);
std::vector<std::string> augmentor_names();

bool needs_autoencoder(AugmentorKind kind);
bool mixes_pairs(AugmentorKind kind);

}  // namespace mra::augment
