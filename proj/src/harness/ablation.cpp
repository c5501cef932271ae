#include "mra/harness/ablation.hpp"

#include <cmath>
#include <cstdio>

#include "mra/harness/classification.hpp"
#include "mra/harness/models.hpp"
#include "mra/harness/pretraining.hpp"
#include "mra/io/plot.hpp"

namespace mra::harness {

using nlohmann::json;

namespace {

std::string value_label(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

void require_autoencoder_suite(const RunConfig& base) {
  if (!augment::needs_autoencoder(base.augment.augmentor)) {
    fail(ErrorKind::config, "ablation suite '" + std::string(to_string(base.ablation.suite)) +
                                "' sweeps the autoencoder; set augment.augmentor to an mra arm");
  }
  if (base.checkpoint) {
    fail(ErrorKind::config, "ablation suite '" + std::string(to_string(base.ablation.suite)) +
                                "' pretrains one autoencoder per arm; checkpoint must be null");
  }
}

ArmSpec make_arm(const RunConfig& reference, std::string name, const std::string& key, json value, bool own) {
  ArmSpec arm;
  arm.name = std::move(name);
  arm.swept_key = key;
  arm.swept_value = value;
  arm.config = with_value(reference, key, std::move(value));
  arm.own_pretraining = own;
  arm.diff = diff_keys(arm.config.document, reference.document);
  if (arm.diff.size() > 1) {
    fail(ErrorKind::state, "ablation arm " + arm.name + " differs from the reference in " +
                               std::to_string(arm.diff.size()) + " keys: " + join(arm.diff, " "));
  }
  return arm;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> finals(const ArmOutcome& arm) {
  std::vector<double> out;
  for (const auto& r : arm.runs) out.push_back(r.metrics.final_eval_acc().value_or(std::nan("")));
  return out;
}

}  // namespace

double ArmOutcome::mean_final_eval_acc() const { return mean_of(finals(*this)); }

double ArmOutcome::std_final_eval_acc() const {
  const std::vector<double> v = finals(*this);
  if (v.size() < 2) return v.empty() ? std::nan("") : 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double ArmOutcome::mean_best_eval_acc() const {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.metrics.best_eval_acc().value_or(std::nan("")));
  return mean_of(v);
}

std::vector<ArmSpec> plan_ablation(const RunConfig& base) {
  std::vector<ArmSpec> arms;
  switch (base.ablation.suite) {
    case AblationSuite::mask_ratio:
      require_autoencoder_suite(base);
      if (base.augment.mask_ratio) {
        fail(ErrorKind::config, "mask_ratio suite needs augment.mask_ratio null so augmentation uses the swept ratio");
      }
      for (double r : base.ablation.mask_ratios) {
        arms.push_back(make_arm(base, "ratio_" + format_number(r), "pretrain.mask_ratio", r, true));
      }
      break;
    case AblationSuite::pretrain_epochs:
      require_autoencoder_suite(base);
      for (int e : base.ablation.pretrain_epochs) {
        arms.push_back(make_arm(base, "epochs_" + std::to_string(e), "pretrain.epochs", e, true));
      }
      break;
    case AblationSuite::model_size:
      require_autoencoder_suite(base);
      for (const auto& preset : base.ablation.model_presets) {
        arms.push_back(make_arm(base, preset, "model_preset", preset, true));
      }
      break;
    case AblationSuite::mask_strategy: {
      RunConfig reference = with_value(with_value(base, "augment.augmentor", "mra"), "augment.strategy", "mask_low");
      arms.push_back(make_arm(reference, "baseline", "augment.augmentor", "none", false));
      for (const char* s : {"mask_low", "mask_high", "random"}) {
        arms.push_back(make_arm(reference, s, "augment.strategy", s, false));
      }
      break;
    }
    case AblationSuite::reconstruction: {
      RunConfig reference = with_value(base, "augment.augmentor", "mra");
      arms.push_back(make_arm(reference, "baseline", "augment.augmentor", "none", false));
      for (const char* a : {"cutout", "mra_mask_only", "mra"}) {
        arms.push_back(make_arm(reference, a, "augment.augmentor", a, false));
      }
      break;
    }
  }
  return arms;
}

AblationResult run_ablation(const RunConfig& base, const io::OutputDir& out, const io::Dataset& data) {
  const std::vector<ArmSpec> arms = plan_ablation(base);
  out.write_json("config.json", base.document);

  std::shared_ptr<const mae::MaskedAutoencoder<float>> shared;
  json autoencoder_source = nullptr;
  const bool shares_model = base.ablation.suite == AblationSuite::mask_strategy ||
                            base.ablation.suite == AblationSuite::reconstruction;
  if (shares_model) {
    if (base.checkpoint) {
      shared = load_autoencoder(*base.checkpoint);
      autoencoder_source = *base.checkpoint;
    } else {
      shared = run_pretraining(base, out.subdir("pretrain"), data).model;
      autoencoder_source = "pretrain/" + std::string(kAutoencoderFile);
    }
  }

  AblationResult result;
  for (const ArmSpec& arm : arms) {
    ArmOutcome outcome;
    outcome.spec = arm;
    const io::OutputDir arm_dir = out.subdir("arms/" + arm.name);
    try {
      std::shared_ptr<const mae::MaskedAutoencoder<float>> model = shared;
      if (arm.own_pretraining) model = run_pretraining(arm.config, arm_dir.subdir("pretrain"), data).model;
      for (std::uint64_t seed : base.ablation.seeds) {
        const RunConfig run = with_value(arm.config, "seed", seed);
        const ClassificationResult r =
            run_classification(run, arm_dir.subdir("seed" + std::to_string(seed)), data, model);
        outcome.runs.push_back({seed, r.metrics, r.augment_calls, r.probe_digest});
      }
      outcome.ok = true;
    } catch (const Error& e) {
      outcome.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    result.arms.push_back(std::move(outcome));
  }

  std::string comparison =
      "arm,swept_key,swept_value,diff_keys,seeds,status,mean_final_eval_acc,std_final_eval_acc,"
      "mean_best_eval_acc,probe_digest,error\n";
  std::string runs = "arm,seed,final_eval_acc,best_eval_acc,best_epoch,augment_calls,probe_digest\n";
  std::vector<io::PlotSeries> curves;
  json summary_arms = json::array();
  for (const auto& arm : result.arms) {
    const std::string digest = arm.runs.empty() ? "" : arm.runs.front().probe_digest;
    comparison += csv_field(arm.spec.name) + "," + arm.spec.swept_key + "," + csv_field(value_label(arm.spec.swept_value)) +
                  "," + join(arm.spec.diff, " ") + "," + std::to_string(arm.runs.size()) + "," +
                  (arm.ok ? "ok" : "failed") + "," + (arm.ok ? format_number(arm.mean_final_eval_acc()) : "") + "," +
                  (arm.ok ? format_number(arm.std_final_eval_acc()) : "") + "," +
                  (arm.ok ? format_number(arm.mean_best_eval_acc()) : "") + "," + digest + "," +
                  csv_field(arm.error) + "\n";
    io::PlotSeries curve{arm.spec.name, {}, {}};
    for (const auto& r : arm.runs) {
      runs += csv_field(arm.spec.name) + "," + std::to_string(r.seed) + "," +
              format_number(r.metrics.final_eval_acc().value_or(std::nan(""))) + "," +
              format_number(r.metrics.best_eval_acc().value_or(std::nan(""))) + "," +
              std::to_string(r.metrics.best_epoch()) + "," + std::to_string(r.augment_calls) + "," + r.probe_digest + "\n";
    }
    if (arm.ok && !arm.runs.empty()) {
      for (std::size_t e = 0; e < arm.runs.front().metrics.epochs.size(); ++e) {
        double sum = 0.0;
        for (const auto& r : arm.runs) sum += r.metrics.epochs[e].eval_acc.value_or(0.0);
        curve.x.push_back(static_cast<double>(e + 1));
        curve.y.push_back(sum / static_cast<double>(arm.runs.size()));
      }
    }
    curves.push_back(std::move(curve));
    summary_arms.push_back({{"arm", arm.spec.name},
                            {"swept_key", arm.spec.swept_key},
                            {"swept_value", arm.spec.swept_value},
                            {"status", arm.ok ? "ok" : "failed"},
                            {"error", arm.error},
                            {"mean_final_eval_acc", arm.ok ? json(arm.mean_final_eval_acc()) : json(nullptr)},
                            {"probe_digest", digest}});
  }
  out.write_text("comparison.csv", comparison);
  out.write_text("runs.csv", runs);
  out.write_png("ablation_curves.png", io::render_line_plot(curves, {.y_min = 0.0, .y_max = 1.0}));
  out.write_json("summary.json", {{"task", "ablate"},
                                  {"suite", to_string(base.ablation.suite)},
                                  {"config_hash", base.hash()},
                                  {"autoencoder", autoencoder_source},
                                  {"arms", summary_arms}});
  out.write_manifest(base.hash());
  return result;
}

AblationResult run_ablation(const RunConfig& base, const io::OutputDir& out) {
  const io::Dataset data = load_run_dataset(base);
  return run_ablation(base, out, data);
}

}  // namespace mra::harness
