#pragma once

#include <filesystem>
#include <string>

namespace mra::acceptance {

enum class Verdict { pass, fail, blocked };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

struct Context {
  std::filesystem::path work;  // scratch root owned by one criterion
};

Outcome gradient_correctness(const Context& ctx);
Outcome masking_algebra(const Context& ctx);
Outcome selection_invariance(const Context& ctx);
Outcome pretraining_sanity(const Context& ctx);
Outcome frozen_augmentor(const Context& ctx);
Outcome strategy_ordering(const Context& ctx);
Outcome occlusion_anchors(const Context& ctx);
Outcome reconstruction_plumbing(const Context& ctx);
Outcome reproducibility(const Context& ctx);

}  // namespace mra::acceptance
