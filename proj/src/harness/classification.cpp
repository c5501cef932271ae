#include "mra/harness/classification.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "mra/hash.hpp"
#include "mra/harness/augment_pipeline.hpp"
#include "mra/harness/models.hpp"
#include "mra/harness/schedule.hpp"
#include "mra/io/plot.hpp"
#include "mra/nn/functional.hpp"

namespace mra::harness {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kOrderStream = 12;
constexpr std::uint64_t kBatchStream = 13;
constexpr std::uint64_t kProbeStream = 14;

double learning_rate(const ClassifyConfig& c, int epoch) {
  switch (c.schedule) {
    case LrSchedule::step: return step_decay(epoch, c.epochs, c.optimizer.learning_rate);
    case LrSchedule::cosine: return cosine_with_warmup(epoch, c.epochs, 0, c.optimizer.learning_rate, 0.0);
    case LrSchedule::constant: break;
  }
  return c.optimizer.learning_rate;
}

std::shared_ptr<const mae::MaskedAutoencoder<float>> resolve_autoencoder(
    const RunConfig& config, std::shared_ptr<const mae::MaskedAutoencoder<float>> given) {
  if (!augment::needs_autoencoder(config.augment.augmentor)) return nullptr;
  if (given) return given;
  if (!config.checkpoint) {
    fail(ErrorKind::config, "augmentor '" + std::string(augment::to_string(config.augment.augmentor)) +
                                "' needs a pretrained checkpoint (set checkpoint or pass --checkpoint)");
  }
  return load_autoencoder(*config.checkpoint);
}

std::string labels_digest(const std::vector<int>& labels) {
  return sha256_hex(std::span<const std::byte>(reinterpret_cast<const std::byte*>(labels.data()),
                                               labels.size() * sizeof(int)));
}

}  // namespace

std::string probe_digest(const RunConfig& config, const io::Dataset& data,
                         std::shared_ptr<const mae::MaskedAutoencoder<float>> autoencoder) {
  TrainingAugmentor augmentor(config.augment, config.pretrain.mask_ratio, resolve_autoencoder(config, autoencoder));
  const std::size_t n = std::min<std::size_t>(config.eval.probe_batch, data.train.images.size());
  const auto images = std::span<const Image>(data.train.images).first(n);
  const auto labels = std::span<const int>(data.train.labels).first(n);
  const AugmentedBatch batch = augmentor.apply(images, labels, derive_seed(config.seed, {kProbeStream}));
  Sha256 hasher;
  for (const auto& image : batch.images) {
    hasher.update(image.pixels().data(), image.size() * sizeof(float));
  }
  return hasher.hex_digest();
}

ClassificationResult run_classification(const RunConfig& config, const io::OutputDir& out, const io::Dataset& data,
                                        std::shared_ptr<const mae::MaskedAutoencoder<float>> autoencoder) {
  autoencoder = resolve_autoencoder(config, std::move(autoencoder));
  const ClassifyConfig& cc = config.classify;
  ClassificationResult result;
  result.model = std::make_shared<classify::ResNetMini<float>>(classifier_config(config, data));
  classify::ResNetMini<float>& model = *result.model;
  {
    Rng init_rng = make_rng(config.seed, {kInitStream});
    model.init(init_rng);
  }
  nn::Optimizer<float> optimizer(cc.optimizer);
  TrainingAugmentor augmentor(config.augment, config.pretrain.mask_ratio, autoencoder);
  if (augmentor.handle()) result.augmentor_digest_before = augmentor.handle()->parameter_digest();
  const std::string labels_before = labels_digest(data.train.labels);
  result.probe_digest = probe_digest(config, data, autoencoder);

  const std::size_t n = data.train.images.size();
  const std::size_t batch_size = static_cast<std::size_t>(cc.batch_size);
  const int classes = data.num_classes;
  std::vector<std::size_t> order(n);
  ImageBatch batch_images;
  std::vector<int> batch_labels;
  auto params = model.parameters();

  for (int epoch = 0; epoch < cc.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    optimizer.set_learning_rate(learning_rate(cc, epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng = make_rng(config.seed, {kOrderStream, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), order_rng);

    double loss_sum = 0.0;
    double correct = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += batch_size, ++batch_index) {
      const std::uint64_t batch_seed =
          derive_seed(config.seed, {kBatchStream, static_cast<std::uint64_t>(epoch), batch_index});
      const std::size_t count = std::min(batch_size, n - begin);
      batch_images.clear();
      batch_labels.clear();
      for (std::size_t i = 0; i < count; ++i) {
        Rng crop_rng = make_rng(batch_seed, {0, i});
        const std::size_t idx = order[begin + i];
        batch_images.push_back(random_crop_flip(data.train.images[idx], cc.crop_padding, cc.flip, crop_rng));
        batch_labels.push_back(data.train.labels[idx]);
      }
      const AugmentedBatch augmented = augmentor.apply(batch_images, batch_labels, batch_seed);

      Matrix<float> targets = Matrix<float>::Zero(static_cast<Index>(count), classes);
      for (std::size_t i = 0; i < count; ++i) {
        const auto& label = augmented.labels[i];
        targets(static_cast<Index>(i), label.label_a) += static_cast<float>(label.weight_a());
        targets(static_cast<Index>(i), label.label_b) += static_cast<float>(label.weight_b());
      }
      typename classify::ResNetMini<float>::Cache cache;
      const Matrix<float> logits = model.forward(classify::to_feature_batch<float>(augmented.images), &cache);
      Matrix<float> dlogits;
      const float loss = nn::softmax_cross_entropy(logits, targets, &dlogits);
      if (!std::isfinite(loss)) fail(ErrorKind::numeric, "non-finite classification loss at epoch " + std::to_string(epoch + 1));
      nn::zero_grads(params);
      model.backward(dlogits, cache);
      optimizer.step(params);

      loss_sum += static_cast<double>(loss) * static_cast<double>(count);
      for (std::size_t i = 0; i < count; ++i) {
        Index predicted = 0;
        logits.row(static_cast<Index>(i)).maxCoeff(&predicted);
        const auto& label = augmented.labels[i];
        if (predicted == label.label_a) correct += label.weight_a();
        if (predicted == label.label_b) correct += label.weight_b();
      }
    }

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = loss_sum / static_cast<double>(n);
    m.train_acc = correct / static_cast<double>(n);
    m.eval_acc = evaluate_accuracy(model, data.eval.images, data.eval.labels);
    if (!config.deterministic) {
      m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    result.metrics.epochs.push_back(m);
  }

  result.augment_calls = augmentor.calls();
  if (augmentor.handle()) {
    result.augmentor_digest_after = augmentor.handle()->parameter_digest();
    if (result.augmentor_digest_after != result.augmentor_digest_before) {
      fail(ErrorKind::state, "frozen augmentor parameters changed during training");
    }
  }
  const std::string labels_after = labels_digest(data.train.labels);

  io::Checkpoint ckpt = classifier_checkpoint(model);
  ckpt.step = optimizer.step_count();
  io::store_optimizer(ckpt, optimizer);
  ckpt.extra = {{"config_hash", config.hash()}, {"epochs", cc.epochs}};
  out.write_checkpoint(kClassifierFile, ckpt);
  out.write_text("metrics.csv", result.metrics.to_csv());

  if (config.eval.occlusion_after_train) {
    const int side = data.eval.images.front().height();
    result.occlusion = evaluate_occlusion(model, data.eval, resolve_hole_sizes(config.eval.occlusion_hole_sizes, side));
    out.write_text("occlusion.csv", occlusion_to_csv(*result.occlusion));
    io::PlotSeries curve{"top-1 error", {}, {}};
    for (const auto& p : *result.occlusion) {
      curve.x.push_back(p.hole_size);
      curve.y.push_back(p.error);
    }
    out.write_png("occlusion.png", io::render_line_plot({curve}, {.y_min = 0.0, .y_max = 1.0}));
  }

  const auto optional_value = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json summary = {
      {"task", "classify"},
      {"config_hash", config.hash()},
      {"augmentor", augment::to_string(config.augment.augmentor)},
      {"epochs", cc.epochs},
      {"final_eval_acc", optional_value(result.metrics.final_eval_acc())},
      {"best_eval_acc", optional_value(result.metrics.best_eval_acc())},
      {"best_epoch", result.metrics.best_epoch()},
      {"augment_calls", result.augment_calls},
      {"augmentor_digest_before", result.augmentor_digest_before},
      {"augmentor_digest_after", result.augmentor_digest_after},
      {"labels_digest_before", labels_before},
      {"labels_digest_after", labels_after},
      {"probe_digest", result.probe_digest},
      {"classifier", classify::to_json(model.config())},
  };
  if (result.occlusion) {
    json points = json::array();
    for (const auto& p : *result.occlusion) points.push_back({{"hole_size", p.hole_size}, {"error", p.error}});
    summary["occlusion"] = points;
  }
  out.write_json("summary.json", summary);
  out.write_json("config.json", config.document);
  out.write_manifest(config.hash());
  return result;
}

ClassificationResult run_classification(const RunConfig& config, const io::OutputDir& out) {
  const io::Dataset data = load_run_dataset(config);
  return run_classification(config, out, data);
}

}  // namespace mra::harness
