#include "mra/harness/pretraining.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mra/hash.hpp"
#include "mra/harness/models.hpp"
#include "mra/harness/schedule.hpp"
#include "mra/io/plot.hpp"
#include "mra/mae/pretrain.hpp"

namespace mra::harness {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kOrderStream = 2;
constexpr std::uint64_t kMaskStream = 3;

struct EpochAccumulator {
  double loss_sum = 0.0;
  std::int64_t steps = 0;
  double seconds = 0.0;
};

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::int64_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, {kOrderStream, static_cast<std::uint64_t>(epoch)});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

json steps_json(const std::vector<StepRecord>& steps) {
  json out = json::array();
  for (const auto& s : steps) out.push_back({s.step, s.loss, s.learning_rate});
  return out;
}

std::vector<StepRecord> steps_from_json(const json& j) {
  std::vector<StepRecord> out;
  for (const auto& row : j) out.push_back({row.at(0).get<std::int64_t>(), row.at(1).get<double>(), row.at(2).get<double>()});
  return out;
}

io::Checkpoint training_checkpoint(const RunConfig& config, const mae::MaskedAutoencoder<float>& model,
                                   const nn::Optimizer<float>& optimizer, std::int64_t step,
                                   const PretrainPlan& plan, const PretrainResult& result,
                                   const EpochAccumulator& partial) {
  io::Checkpoint ckpt = autoencoder_checkpoint(model);
  ckpt.step = step;
  ckpt.rng_state = serialize_rng(make_rng(config.seed, {kMaskStream, static_cast<std::uint64_t>(step)}));
  io::store_optimizer(ckpt, optimizer);
  json epochs = json::array();
  for (const auto& m : result.metrics.epochs) epochs.push_back(to_json(m));
  ckpt.extra = {{"config_hash", config.hash()},
                {"total_steps", plan.total_steps},
                {"steps", steps_json(result.steps)},
                {"epochs", epochs},
                {"partial_epoch", {{"loss_sum", partial.loss_sum}, {"steps", partial.steps},
                                   {"seconds", partial.seconds}}}};
  return ckpt;
}

void write_final_artifacts(const RunConfig& config, const io::OutputDir& out, const PretrainResult& result) {
  out.write_text("metrics.csv", result.metrics.to_csv());
  out.write_text("steps.csv", steps_to_csv(result.steps));
  io::PlotSeries curve{"loss", {}, {}};
  for (const auto& s : result.steps) {
    curve.x.push_back(static_cast<double>(s.step));
    curve.y.push_back(s.loss);
  }
  out.write_png("loss_curve.png", io::render_line_plot({curve}));
  json summary = {
      {"task", "pretrain"},
      {"config_hash", config.hash()},
      {"finished", result.finished},
      {"completed_steps", result.completed_steps},
      {"total_steps", result.total_steps},
      {"epochs_completed", result.metrics.epochs.size()},
      {"first_loss", result.steps.empty() ? json(nullptr) : json(result.steps.front().loss)},
      {"final_loss", result.steps.empty() ? json(nullptr) : json(result.steps.back().loss)},
      {"autoencoder", mae::to_json(result.model->config())},
      {"parameter_digest", parameter_digest<float>(std::as_const(*result.model).parameters())},
  };
  out.write_json("summary.json", summary);
  out.write_json("config.json", config.document);
}

}  // namespace

PretrainPlan plan_pretraining(const RunConfig& config, int train_size) {
  if (train_size <= 0) fail(ErrorKind::validation, "pretraining needs a non-empty train split");
  PretrainPlan plan;
  const std::int64_t batch = config.pretrain.batch_size;
  plan.steps_per_epoch = (train_size + batch - 1) / batch;
  plan.total_steps = plan.steps_per_epoch * config.pretrain.epochs;
  if (config.pretrain.max_steps) plan.total_steps = std::min(plan.total_steps, *config.pretrain.max_steps);
  plan.warmup_steps = std::llround(config.pretrain.warmup_fraction * static_cast<double>(plan.total_steps));
  return plan;
}

PretrainResult run_pretraining(const RunConfig& config, const io::OutputDir& out, const io::Dataset& data,
                               const PretrainOptions& options) {
  const PretrainPlan plan = plan_pretraining(config, data.train.size());
  const mae::MaeConfig model_config = autoencoder_config(config, data);

  PretrainResult result;
  result.total_steps = plan.total_steps;
  auto model = std::make_shared<mae::MaskedAutoencoder<float>>(model_config);
  nn::Optimizer<float> optimizer(config.pretrain.optimizer);
  EpochAccumulator partial;
  std::int64_t step = 0;

  if (options.resume) {
    const io::Checkpoint ckpt = io::load_checkpoint(*options.resume);
    ckpt.expect_kind(kMaeKind);
    if (ckpt.extra.value("config_hash", std::string()) != config.hash()) {
      fail(ErrorKind::config, "resume checkpoint " + options.resume->string() + " was written by a different config");
    }
    model = autoencoder_from_checkpoint(ckpt);
    optimizer = io::restore_optimizer<float>(ckpt);
    step = ckpt.step;
    result.steps = steps_from_json(ckpt.extra.at("steps"));
    for (const auto& e : ckpt.extra.at("epochs")) result.metrics.epochs.push_back(epoch_metrics_from_json(e));
    const json& p = ckpt.extra.at("partial_epoch");
    partial = {p.at("loss_sum").get<double>(), p.at("steps").get<std::int64_t>(), p.at("seconds").get<double>()};
  } else {
    Rng init_rng = make_rng(config.seed, {kInitStream});
    model->init(init_rng);
  }
  result.model = model;

  const std::size_t n = static_cast<std::size_t>(data.train.size());
  const std::size_t batch_size = static_cast<std::size_t>(config.pretrain.batch_size);
  std::int64_t order_epoch = -1;
  std::vector<std::size_t> order;
  ImageBatch batch;
  batch.reserve(batch_size);

  while (step < plan.total_steps) {
    if (options.stop_after && step >= *options.stop_after) break;
    const auto started = std::chrono::steady_clock::now();
    const std::int64_t epoch = step / plan.steps_per_epoch;
    const std::int64_t within = step % plan.steps_per_epoch;
    if (epoch != order_epoch) {
      order = epoch_order(config.seed, epoch, n);
      order_epoch = epoch;
    }
    batch.clear();
    const std::size_t begin = static_cast<std::size_t>(within) * batch_size;
    for (std::size_t i = begin; i < std::min(n, begin + batch_size); ++i) batch.push_back(data.train.images[order[i]]);

    const double lr = cosine_with_warmup(step, plan.total_steps, plan.warmup_steps,
                                         config.pretrain.optimizer.learning_rate, config.pretrain.min_learning_rate);
    optimizer.set_learning_rate(lr);
    Rng mask_rng = make_rng(config.seed, {kMaskStream, static_cast<std::uint64_t>(step)});
    const double loss = mae::pretrain_step(*model, optimizer, batch, mask_rng);
    ++step;
    result.steps.push_back({step, loss, lr});
    partial.loss_sum += loss;
    ++partial.steps;
    if (!config.deterministic) {
      partial.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }

    if (within + 1 == plan.steps_per_epoch || step == plan.total_steps) {
      EpochMetrics m;
      m.epoch = static_cast<int>(epoch) + 1;
      m.train_loss = partial.loss_sum / static_cast<double>(partial.steps);
      m.seconds = partial.seconds;
      result.metrics.epochs.push_back(m);
      partial = {};
    }
    if (config.pretrain.checkpoint_every > 0 && step % config.pretrain.checkpoint_every == 0 &&
        step < plan.total_steps) {
      out.write_checkpoint(kResumeFile, training_checkpoint(config, *model, optimizer, step, plan, result, partial));
    }
  }

  result.completed_steps = step;
  result.finished = step >= plan.total_steps;
  io::Checkpoint final_ckpt = training_checkpoint(config, *model, optimizer, step, plan, result, partial);
  if (!result.finished) {
    out.write_checkpoint(kResumeFile, final_ckpt);
    out.write_text("metrics.csv", result.metrics.to_csv());
    out.write_text("steps.csv", steps_to_csv(result.steps));
    out.write_json("config.json", config.document);
    out.write_manifest(config.hash());
    return result;
  }
  out.write_checkpoint(kAutoencoderFile, final_ckpt);
  write_final_artifacts(config, out, result);
  out.write_manifest(config.hash());
  return result;
}

PretrainResult run_pretraining(const RunConfig& config, const io::OutputDir& out, const PretrainOptions& options) {
  const io::Dataset data = load_run_dataset(config);
  return run_pretraining(config, out, data, options);
}

}  // namespace mra::harness
