#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "mra/nn/parameter.hpp"

namespace mra::nn {

enum class OptimizerKind { sgd, adamw };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double learning_rate = 0.1;
  double momentum = 0.9;  // sgd
  double weight_decay = 0.0;
  double beta1 = 0.9;  // adamw
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// SGD with heavy-ball momentum (buffer seeded with the first gradient,
/// coupled L2 decay), or AdamW with decoupled decay. Per-parameter buffers
/// are keyed by parameter name so they can be checkpointed.
template <typename Scalar>
class Optimizer {
 public:
  struct Slot {
    Matrix<Scalar> first;
    Matrix<Scalar> second;
  };

  Optimizer() = default;
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  const OptimizerConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t count) { step_count_ = count; }

  std::map<std::string, Slot>& slots() { return slots_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }

  /// Refuses the whole step (throws ErrorKind::numeric) if any gradient is
  /// non-finite; no parameter is touched in that case.
  void step(const ParameterList<Scalar>& params) {
    for (const auto* p : params) {
      if (!p->grad.allFinite()) fail(ErrorKind::numeric, "non-finite gradient in " + p->name);
    }
    ++step_count_;
    for (auto* p : params) {
      if (config_.kind == OptimizerKind::sgd) {
        sgd_update(*p);
      } else {
        adamw_update(*p);
      }
    }
  }

 private:
  void sgd_update(Parameter<Scalar>& p) {
    const Scalar lr = Scalar(config_.learning_rate);
    Matrix<Scalar> g = p.grad;
    if (p.decay && config_.weight_decay != 0.0) g += Scalar(config_.weight_decay) * p.value;
    if (config_.momentum != 0.0) {
      auto [it, inserted] = slots_.try_emplace(p.name);
      if (inserted || it->second.first.size() == 0) {
        it->second.first = g;
      } else {
        it->second.first = Scalar(config_.momentum) * it->second.first + g;
      }
      p.value -= lr * it->second.first;
    } else {
      p.value -= lr * g;
    }
  }

  void adamw_update(Parameter<Scalar>& p) {
    auto [it, inserted] = slots_.try_emplace(p.name);
    Slot& s = it->second;
    if (inserted || s.first.size() == 0) {
      s.first = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
      s.second = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    }
    const Scalar b1 = Scalar(config_.beta1);
    const Scalar b2 = Scalar(config_.beta2);
    s.first = b1 * s.first + (Scalar(1) - b1) * p.grad;
    s.second = b2 * s.second + (Scalar(1) - b2) * p.grad.cwiseAbs2();
    const Scalar c1 = Scalar(1) - Scalar(std::pow(config_.beta1, double(step_count_)));
    const Scalar c2 = Scalar(1) - Scalar(std::pow(config_.beta2, double(step_count_)));
    const Scalar lr = Scalar(config_.learning_rate);
    if (p.decay && config_.weight_decay != 0.0) {
      p.value *= Scalar(1) - lr * Scalar(config_.weight_decay);
    }
    p.value.array() -= lr * (s.first.array() / c1) /
                       ((s.second.array() / c2).sqrt() + Scalar(config_.epsilon));
  }

  OptimizerConfig config_;
  std::int64_t step_count_ = 0;
  std::map<std::string, Slot> slots_;
};

extern template class Optimizer<float>;
extern template class Optimizer<double>;

}  // namespace mra::nn
