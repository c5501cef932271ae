#include "mra/harness/metrics.hpp"

#include <cstdio>

namespace mra::harness {

using nlohmann::json;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

json to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch},
          {"train_loss", m.train_loss},
          {"train_acc", optional_json(m.train_acc)},
          {"eval_acc", optional_json(m.eval_acc)},
          {"seconds", m.seconds}};
}

EpochMetrics epoch_metrics_from_json(const json& j) {
  EpochMetrics m;
  m.epoch = j.at("epoch").get<int>();
  m.train_loss = j.at("train_loss").get<double>();
  m.train_acc = optional_from(j.at("train_acc"));
  m.eval_acc = optional_from(j.at("eval_acc"));
  m.seconds = j.at("seconds").get<double>();
  return m;
}

std::string MetricsRecord::to_csv() const {
  std::string out = "epoch,train_loss,train_acc,eval_acc,seconds\n";
  for (const auto& m : epochs) {
    out += std::to_string(m.epoch) + "," + format_number(m.train_loss) + "," + optional_cell(m.train_acc) +
           "," + optional_cell(m.eval_acc) + "," + format_number(m.seconds) + "\n";
  }
  return out;
}

std::optional<double> MetricsRecord::final_eval_acc() const {
  for (auto it = epochs.rbegin(); it != epochs.rend(); ++it) {
    if (it->eval_acc) return it->eval_acc;
  }
  return std::nullopt;
}

std::optional<double> MetricsRecord::best_eval_acc() const {
  std::optional<double> best;
  for (const auto& m : epochs) {
    if (m.eval_acc && (!best || *m.eval_acc > *best)) best = m.eval_acc;
  }
  return best;
}

int MetricsRecord::best_epoch() const {
  std::optional<double> best;
  int epoch = -1;
  for (const auto& m : epochs) {
    if (m.eval_acc && (!best || *m.eval_acc > *best)) {
      best = m.eval_acc;
      epoch = m.epoch;
    }
  }
  return epoch;
}

std::string steps_to_csv(const std::vector<StepRecord>& steps) {
  std::string out = "step,loss,lr\n";
  for (const auto& s : steps) {
    out += std::to_string(s.step) + "," + format_number(s.loss) + "," + format_number(s.learning_rate) + "\n";
  }
  return out;
}

}  // namespace mra::harness
