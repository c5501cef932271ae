#pragma once

#include <cstdint>

namespace mra::harness {

/// Linear warmup over the first `warmup_steps` steps, then half-cosine
/// decay from base_lr to min_lr at total_steps.
double cosine_with_warmup(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps,
                          double base_lr, double min_lr);

/// x0.1 at one third and again at two thirds of the epochs.
double step_decay(int epoch, int total_epochs, double base_lr);

}  // namespace mra::harness
