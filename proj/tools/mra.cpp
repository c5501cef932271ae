#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mra/augment/mra_augmentor.hpp"
#include "mra/error.hpp"
#include "mra/harness/ablation.hpp"
#include "mra/harness/classification.hpp"
#include "mra/harness/models.hpp"
#include "mra/harness/occlusion.hpp"
#include "mra/harness/pretraining.hpp"
#include "mra/io/checkpoint.hpp"
#include "mra/io/files.hpp"
#include "mra/io/output_dir.hpp"
#include "mra/io/plot.hpp"

using namespace mra;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> checkpoint;
  std::optional<std::string> augmentor;
  std::optional<std::string> strategy;
  std::optional<double> mask_ratio;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "run config (JSON)");
  cmd->add_option("--seed", f.seed, "override seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint path");
  cmd->add_option("--augmentor", f.augmentor, "augmentor registry name");
  cmd->add_option("--strategy", f.strategy, "mask strategy: mask_low|mask_high|random");
  cmd->add_option("--mask-ratio", f.mask_ratio, "augmentation mask ratio");
}

harness::RunConfig resolve_config(const CommonFlags& f, const std::string& task,
                                  const std::optional<std::string>& suite = std::nullopt) {
  json doc = json::object();
  if (!f.config_path.empty()) {
    try {
      doc = json::parse(io::read_text_file(f.config_path));
    } catch (const json::parse_error& e) {
      fail(ErrorKind::config, f.config_path + ": " + e.what());
    }
    if (!doc.is_object()) fail(ErrorKind::config, f.config_path + ": config must be a JSON object");
  }
  harness::set_config_value(doc, "task", task);
  if (f.seed) harness::set_config_value(doc, "seed", *f.seed);
  if (f.out) harness::set_config_value(doc, "output_dir", *f.out);
  if (f.checkpoint) harness::set_config_value(doc, "checkpoint", *f.checkpoint);
  if (f.augmentor) harness::set_config_value(doc, "augment.augmentor", *f.augmentor);
  if (f.strategy) harness::set_config_value(doc, "augment.strategy", *f.strategy);
  if (f.mask_ratio) harness::set_config_value(doc, "augment.mask_ratio", *f.mask_ratio);
  if (suite) harness::set_config_value(doc, "ablation.suite", *suite);
  return harness::parse_run_config(doc);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int cmd_pretrain(const CommonFlags& f, const std::optional<std::string>& resume,
                 const std::optional<std::int64_t>& stop_after) {
  const harness::RunConfig config = resolve_config(f, "pretrain");
  const io::OutputDir out(config.output_dir);
  harness::PretrainOptions options;
  if (resume) options.resume = *resume;
  options.stop_after = stop_after;
  const auto r = harness::run_pretraining(config, out, options);
  std::cout << json{{"status", r.finished ? "finished" : "stopped"},
                    {"out", out.root().string()},
                    {"steps", r.completed_steps},
                    {"total_steps", r.total_steps},
                    {"final_loss", r.steps.empty() ? json(nullptr) : json(r.steps.back().loss)}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_train(const CommonFlags& f) {
  const harness::RunConfig config = resolve_config(f, "classify");
  const io::OutputDir out(config.output_dir);
  const auto r = harness::run_classification(config, out);
  std::cout << json{{"status", "finished"},
                    {"out", out.root().string()},
                    {"final_eval_acc", optional_number(r.metrics.final_eval_acc())},
                    {"best_eval_acc", optional_number(r.metrics.best_eval_acc())},
                    {"augment_calls", r.augment_calls}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_augment_dump(const CommonFlags& f, int rows) {
  harness::RunConfig config = resolve_config(f, "classify");
  if (!config.checkpoint) fail(ErrorKind::config, "augment-dump needs --checkpoint");
  if (rows < 1) fail(ErrorKind::usage, "-n must be >= 1");
  const auto model = harness::load_autoencoder(*config.checkpoint);
  const io::Dataset data = harness::load_run_dataset(config);
  if (static_cast<int>(data.train.images.size()) < rows) {
    fail(ErrorKind::validation, "dataset has fewer than " + std::to_string(rows) + " images");
  }
  const auto handle = augment::AugmentorHandle::create(
      model, config.augment.strategy, config.augment.effective_mask_ratio(model->config().mask_ratio),
      1.0, config.augment.scoring);
  const auto images = std::span<const Image>(data.train.images).first(static_cast<std::size_t>(rows));
  const Image grid = augment::augmentation_grid(images, handle, config.seed);
  const io::OutputDir out(config.output_dir);
  out.write_png("augment_grid.png", grid);
  out.write_json("config.json", config.document);
  out.write_json("summary.json", {{"task", "augment-dump"},
                                  {"rows", rows},
                                  {"columns", 3},
                                  {"strategy", masking::to_string(handle.strategy)},
                                  {"keep_count", handle.keep_count},
                                  {"config_hash", config.hash()}});
  out.write_manifest(config.hash());
  std::cout << json{{"status", "finished"}, {"out", out.root().string()}, {"rows", rows}}.dump() << "\n";
  return 0;
}

int cmd_eval_occlusion(const CommonFlags& f) {
  const harness::RunConfig config = resolve_config(f, "classify");
  if (!config.checkpoint) fail(ErrorKind::config, "eval-occlusion needs --checkpoint pointing at a classifier");
  const io::Checkpoint ckpt = io::load_checkpoint(*config.checkpoint);
  const classify::ResNetMini<float> model = harness::classifier_from_checkpoint(ckpt);
  const io::Dataset data = harness::load_run_dataset(config);
  const int side = data.eval.images.front().height();
  const auto curve = harness::evaluate_occlusion(model, data.eval,
                                                 harness::resolve_hole_sizes(config.eval.occlusion_hole_sizes, side));
  const io::OutputDir out(config.output_dir);
  out.write_text("occlusion.csv", harness::occlusion_to_csv(curve));
  io::PlotSeries series{"top-1 error", {}, {}};
  json points = json::array();
  for (const auto& p : curve) {
    series.x.push_back(p.hole_size);
    series.y.push_back(p.error);
    points.push_back({{"hole_size", p.hole_size}, {"error", p.error}});
  }
  out.write_png("occlusion.png", io::render_line_plot({series}, {.y_min = 0.0, .y_max = 1.0}));
  out.write_json("config.json", config.document);
  out.write_json("summary.json", {{"task", "eval-occlusion"}, {"config_hash", config.hash()}, {"occlusion", points}});
  out.write_manifest(config.hash());
  std::cout << json{{"status", "finished"}, {"out", out.root().string()}, {"occlusion", points}}.dump() << "\n";
  return 0;
}

int cmd_ablate(const CommonFlags& f, const std::optional<std::string>& suite) {
  const harness::RunConfig config = resolve_config(f, "ablate", suite);
  const io::OutputDir out(config.output_dir);
  const auto r = harness::run_ablation(config, out);
  json arms = json::array();
  for (const auto& arm : r.arms) {
    arms.push_back({{"arm", arm.spec.name},
                    {"status", arm.ok ? "ok" : "failed"},
                    {"mean_final_eval_acc", arm.ok ? json(arm.mean_final_eval_acc()) : json(nullptr)}});
  }
  std::cout << json{{"status", "finished"}, {"out", out.root().string()}, {"arms", arms}}.dump() << "\n";
  return 0;
}

int cmd_inspect(const std::string& target) {
  const std::filesystem::path path(target);
  if (std::filesystem::is_directory(path)) {
    const std::string mismatch = io::verify_manifest(path);
    if (!mismatch.empty()) fail(ErrorKind::corrupt_data, "artifact " + mismatch + " does not match the manifest");
    const json manifest = json::parse(io::read_text_file(path / std::string(io::kManifestName)));
    std::cout << json{{"manifest", "ok"},
                      {"config_hash", manifest.at("config_hash")},
                      {"artifacts", manifest.at("artifacts").size()}}
                     .dump()
              << "\n";
    return 0;
  }
  const io::Checkpoint ckpt = io::load_checkpoint(path);
  std::int64_t values = 0;
  for (const auto& t : ckpt.tensors) {
    std::int64_t n = 1;
    for (auto d : t.shape) n *= d;
    values += n;
  }
  std::cout << json{{"kind", ckpt.kind},
                    {"version", io::kCheckpointVersion},
                    {"step", ckpt.step},
                    {"tensors", ckpt.tensors.size()},
                    {"parameters", values},
                    {"optimizer_tensors", ckpt.optimizer_tensors.size()},
                    {"config", ckpt.config}}
                   .dump()
            << "\n";
  return 0;
}

int report(ErrorKind kind, std::string message) {
  for (char& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "error: kind=" << to_string(kind) << " message=" << message << "\n";
  return kind == ErrorKind::usage ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mask-reconstruct augmentation: pretraining, training, ablations"};
  app.require_subcommand(1);

  CommonFlags pretrain_flags, train_flags, dump_flags, occlusion_flags, ablate_flags;
  std::optional<std::string> resume, suite;
  std::optional<std::int64_t> stop_after;
  int rows = 8;
  std::string inspect_target;

  auto* pretrain = app.add_subcommand("pretrain", "pretrain the masked autoencoder");
  add_common(pretrain, pretrain_flags);
  pretrain->add_option("--resume", resume, "resume from a training checkpoint");
  pretrain->add_option("--stop-after", stop_after, "stop after this many steps and write checkpoint.ckpt");

  auto* train = app.add_subcommand("train", "train a classifier with an augmentor");
  add_common(train, train_flags);

  auto* dump = app.add_subcommand("augment-dump", "write an original|masked|reconstructed grid");
  add_common(dump, dump_flags);
  dump->add_option("-n", rows, "rows in the grid");

  auto* occlusion = app.add_subcommand("eval-occlusion", "occlusion curve of a trained classifier");
  add_common(occlusion, occlusion_flags);

  auto* ablate = app.add_subcommand("ablate", "run an ablation suite");
  add_common(ablate, ablate_flags);
  ablate->add_option("--suite", suite, "mask_ratio|mask_strategy|reconstruction|pretrain_epochs|model_size");

  auto* inspect = app.add_subcommand("inspect", "describe a checkpoint or verify a run directory");
  inspect->add_option("path", inspect_target, "checkpoint file or run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorKind::usage, e.what());
  }

  try {
    if (*pretrain) return cmd_pretrain(pretrain_flags, resume, stop_after);
    if (*train) return cmd_train(train_flags);
    if (*dump) return cmd_augment_dump(dump_flags, rows);
    if (*occlusion) return cmd_eval_occlusion(occlusion_flags);
    if (*ablate) return cmd_ablate(ablate_flags, suite);
    if (*inspect) return cmd_inspect(inspect_target);
  } catch (const Error& e) {
    return report(e.kind(), e.what());
  } catch (const std::exception& e) {
    return report(ErrorKind::state, e.what());
  }
  return report(ErrorKind::usage, "no subcommand");
}
