#include "mra/harness/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mra::harness {

double cosine_with_warmup(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps,
                          double base_lr, double min_lr) {
  if (warmup_steps > 0 && step < warmup_steps) {
    return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  const std::int64_t span = std::max<std::int64_t>(1, total_steps - warmup_steps);
  const double t = std::clamp(static_cast<double>(step - warmup_steps) / static_cast<double>(span), 0.0, 1.0);
  return min_lr + (base_lr - min_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

double step_decay(int epoch, int total_epochs, double base_lr) {
  double lr = base_lr;
  const int first = total_epochs / 3;
  const int second = 2 * total_epochs / 3;
  if (first > 0 && epoch >= first) lr *= 0.1;
  if (second > 0 && second > first && epoch >= second) lr *= 0.1;
  return lr;
}

}  // namespace mra::harness
