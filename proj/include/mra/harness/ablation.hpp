#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mra/harness/metrics.hpp"
#include "mra/harness/run_config.hpp"
#include "mra/io/dataset.hpp"
#include "mra/io/output_dir.hpp"

namespace mra::harness {

struct ArmSpec {
  std::string name;
  std::string swept_key;
  nlohmann::json swept_value;
  RunConfig config;
  bool own_pretraining = false;
  std::vector<std::string> diff;  // keys differing from the suite's reference config
};

/// Arms of the configured suite. Each arm differs from the reference
/// config in at most one key; anything else is ErrorKind::state.
std::vector<ArmSpec> plan_ablation(const RunConfig& base);

struct SeedOutcome {
  std::uint64_t seed = 0;
  MetricsRecord metrics;
  std::int64_t augment_calls = 0;
  std::string probe_digest;
};

struct ArmOutcome {
  ArmSpec spec;
  bool ok = false;
  std::string error;
  std::vector<SeedOutcome> runs;

  double mean_final_eval_acc() const;
  double std_final_eval_acc() const;
  double mean_best_eval_acc() const;
};

struct AblationResult {
  std::vector<ArmOutcome> arms;
};

/// Runs every arm for every configured seed under <out>/arms/<arm>/seed<k>.
/// A failing arm is recorded and the suite continues.
AblationResult run_ablation(const RunConfig& base, const io::OutputDir& out, const io::Dataset& data);
AblationResult run_ablation(const RunConfig& base, const io::OutputDir& out);

}  // namespace mra::harness
