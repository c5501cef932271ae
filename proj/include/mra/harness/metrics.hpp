#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mra::harness {

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> train_acc;
  std::optional<double> eval_acc;
  double seconds = 0.0;
};

nlohmann::json to_json(const EpochMetrics& m);
EpochMetrics epoch_metrics_from_json(const nlohmann::json& j);

struct MetricsRecord {
  std::vector<EpochMetrics> epochs;

  /// Header "epoch,train_loss,train_acc,eval_acc,seconds"; missing
  /// accuracies are empty cells.
  std::string to_csv() const;
  std::optional<double> final_eval_acc() const;
  std::optional<double> best_eval_acc() const;
  int best_epoch() const;
};

/// Fixed 9-significant-digit formatting shared by every CSV writer.
std::string format_number(double value);

struct StepRecord {
  std::int64_t step = 0;
  double loss = 0.0;
  double learning_rate = 0.0;
};

std::string steps_to_csv(const std::vector<StepRecord>& steps);

}  // namespace mra::harness
