#include <doctest.h>

#include <cmath>

#include "mra/harness/ablation.hpp"
#include "mra/harness/classification.hpp"
#include "mra/harness/models.hpp"
#include "mra/harness/occlusion.hpp"
#include "mra/harness/pretraining.hpp"
#include "mra/harness/schedule.hpp"
#include "mra/io/dataset.hpp"
#include "mra/io/files.hpp"
#include "mra/io/output_dir.hpp"
#include "support/helpers.hpp"

using namespace mra;
using namespace mra::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_pretrain_config() {
  return parse_run_config({
      {"task", "pretrain"},
      {"model_preset", "mae-tiny-test"},
      {"data", {{"source", "synthetic:gradients"}, {"train_size", 48}, {"eval_size", 16}, {"image_size", 16}}},
      {"pretrain", {{"epochs", 2}, {"batch_size", 16}, {"learning_rate", 2e-3}}},
  });
}

RunConfig tiny_classify_config(const json& extra = json::object()) {
  json doc = {
      {"model_preset", "mae-tiny-test"},
      {"data", {{"source", "synthetic:gradients"}, {"train_size", 48}, {"eval_size", 32}, {"image_size", 16}}},
      {"pretrain", {{"epochs", 1}, {"batch_size", 16}}},
      {"classify", {{"epochs", 2}, {"batch_size", 16}, {"classifier", "resnet-mini-tiny"}}},
      {"eval", {{"occlusion_hole_sizes", {0, 8, 16}}}},
  };
  doc.merge_patch(extra);
  return parse_run_config(doc);
}

std::shared_ptr<const mae::MaskedAutoencoder<float>> shared_autoencoder() {
  static const auto model = [] {
    test::TempDir dir("harness_ae");
    const RunConfig cfg = tiny_pretrain_config();
    return std::shared_ptr<const mae::MaskedAutoencoder<float>>(
        run_pretraining(cfg, io::OutputDir(dir / "pre"), load_run_dataset(cfg)).model);
  }();
  return model;
}

}  // namespace

TEST_CASE("cosine schedule warms up linearly then decays to the floor") {
  CHECK(cosine_with_warmup(0, 100, 10, 1.0, 0.0) == doctest::Approx(0.1));
  CHECK(cosine_with_warmup(9, 100, 10, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(cosine_with_warmup(10, 100, 10, 1.0, 0.0) == doctest::Approx(1.0));
  const double mid = cosine_with_warmup(55, 100, 10, 1.0, 0.1);
  CHECK(mid == doctest::Approx(0.1 + 0.9 * 0.5 * (1 + std::cos(M_PI * 45.0 / 90.0))));
  CHECK(cosine_with_warmup(99, 100, 0, 1.0, 0.1) > 0.1);
  CHECK(cosine_with_warmup(99, 100, 0, 1.0, 0.1) < 0.1 + 1e-3);
  double prev = 2.0;
  for (std::int64_t s = 10; s < 100; ++s) {
    const double lr = cosine_with_warmup(s, 100, 10, 1.0, 0.0);
    CHECK(lr <= prev);
    prev = lr;
  }
}

TEST_CASE("step decay drops tenfold at one and two thirds") {
  CHECK(step_decay(0, 30, 0.05) == doctest::Approx(0.05));
  CHECK(step_decay(9, 30, 0.05) == doctest::Approx(0.05));
  CHECK(step_decay(10, 30, 0.05) == doctest::Approx(0.005));
  CHECK(step_decay(19, 30, 0.05) == doctest::Approx(0.005));
  CHECK(step_decay(20, 30, 0.05) == doctest::Approx(0.0005));
  CHECK(step_decay(0, 1, 0.05) == doctest::Approx(0.05));
  CHECK(step_decay(1, 2, 0.05) == doctest::Approx(0.005));
}

TEST_CASE("pretraining plan") {
  RunConfig cfg = tiny_pretrain_config();
  PretrainPlan plan = plan_pretraining(cfg, 100);
  CHECK(plan.steps_per_epoch == 7);
  CHECK(plan.total_steps == 14);
  CHECK(plan.warmup_steps == 1);
  cfg = with_value(cfg, "pretrain.max_steps", 5);
  plan = plan_pretraining(cfg, 100);
  CHECK(plan.total_steps == 5);
}

TEST_CASE("pretraining writes its artifacts and lowers the loss") {
  test::TempDir dir("pretrain_artifacts");
  const RunConfig cfg = with_value(tiny_pretrain_config(), "pretrain.epochs", 6);
  const PretrainResult r = run_pretraining(cfg, io::OutputDir(dir / "run"));
  CHECK(r.finished);
  CHECK(r.completed_steps == 18);
  CHECK(r.steps.size() == 18);
  CHECK(r.metrics.epochs.size() == 6);
  CHECK(r.metrics.epochs.back().train_loss < r.metrics.epochs.front().train_loss);
  CHECK(r.metrics.epochs.front().seconds == 0.0);
  for (const char* name : {kAutoencoderFile, "metrics.csv", "steps.csv", "loss_curve.png", "summary.json",
                           "config.json", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "run" / name), name);
  }
  CHECK(io::verify_manifest(dir / "run").empty());
  const auto csv = io::read_text_file(dir / "run" / "metrics.csv");
  CHECK(csv.rfind("epoch,train_loss,train_acc,eval_acc,seconds\n", 0) == 0);
}

TEST_CASE("interrupted pretraining resumes bit-exactly") {
  test::TempDir dir("pretrain_resume");
  const RunConfig cfg = tiny_pretrain_config();
  const PretrainResult full = run_pretraining(cfg, io::OutputDir(dir / "full"));

  const PretrainResult part = run_pretraining(cfg, io::OutputDir(dir / "split"), {.stop_after = 4});
  CHECK_FALSE(part.finished);
  CHECK(part.completed_steps == 4);
  CHECK(fs::exists(dir / "split" / kResumeFile));
  CHECK_FALSE(fs::exists(dir / "split" / kAutoencoderFile));
  const PretrainResult resumed =
      run_pretraining(cfg, io::OutputDir(dir / "split"), {.resume = dir / "split" / kResumeFile});
  CHECK(resumed.finished);
  CHECK(io::read_file(dir / "full" / kAutoencoderFile) == io::read_file(dir / "split" / kAutoencoderFile));
  CHECK(io::read_text_file(dir / "full" / "steps.csv") == io::read_text_file(dir / "split" / "steps.csv"));
  CHECK(io::read_text_file(dir / "full" / "metrics.csv") == io::read_text_file(dir / "split" / "metrics.csv"));

  const RunConfig other = with_value(cfg, "pretrain.learning_rate", 1e-2);
  CHECK_ERROR_KIND(run_pretraining(other, io::OutputDir(dir / "split"), {.resume = dir / "split" / kResumeFile}),
                   ErrorKind::config);
}

TEST_CASE("two blobs are linearly separable") {
  // Logistic regression on raw pixels, plain full-batch gradient descent.
  const io::Dataset data = io::load_dataset("synthetic:two-blobs", {0, 0, 16, 0});
  const auto features = [](const io::LabeledImages& set) {
    Eigen::MatrixXd x(set.size(), set.images.front().pixels().size() + 1);
    for (int i = 0; i < set.size(); ++i) {
      x.row(i).head(x.cols() - 1) = set.images[i].pixels().cast<double>().transpose();
      x(i, x.cols() - 1) = 1.0;
    }
    return x;
  };
  const Eigen::MatrixXd x = features(data.train);
  Eigen::VectorXd y(data.train.size());
  for (int i = 0; i < data.train.size(); ++i) y(i) = data.train.labels[i];
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  for (int it = 0; it < 300; ++it) {
    const Eigen::VectorXd p = (1.0 + (-(x * w)).array().exp()).inverse().matrix();
    w -= 0.5 * x.transpose() * (p - y) / double(x.rows());
  }
  const Eigen::MatrixXd xe = features(data.eval);
  const Eigen::VectorXd score = xe * w;
  int correct = 0;
  for (int i = 0; i < data.eval.size(); ++i) correct += (score(i) > 0.0) == (data.eval.labels[i] == 1);
  CHECK(double(correct) / data.eval.size() >= 0.95);
}

TEST_CASE("classifier separates two blobs") {
  test::TempDir dir("two_blobs");
  const RunConfig cfg = parse_run_config({
      {"data", {{"source", "synthetic:two-blobs"}, {"image_size", 16}}},
      {"classify", {{"epochs", 3}, {"classifier", "resnet-mini-tiny"}}},
      {"eval", {{"occlusion_after_train", false}}},
  });
  const ClassificationResult r = run_classification(cfg, io::OutputDir(dir / "run"));
  CHECK(r.metrics.final_eval_acc().value_or(-1.0) >= 0.95);
  CHECK(r.augment_calls == 0);
  CHECK(fs::exists(dir / "run" / kClassifierFile));
  CHECK(io::verify_manifest(dir / "run").empty());
}

TEST_CASE("classification is deterministic for a fixed config") {
  test::TempDir dir("classify_det");
  const RunConfig cfg = tiny_classify_config({{"augment", {{"augmentor", "cutmix"}}}});
  run_classification(cfg, io::OutputDir(dir / "a"));
  run_classification(cfg, io::OutputDir(dir / "b"));
  CHECK(io::read_text_file(dir / "a" / "metrics.csv") == io::read_text_file(dir / "b" / "metrics.csv"));
  CHECK(io::read_file(dir / "a" / kClassifierFile) == io::read_file(dir / "b" / kClassifierFile));
  CHECK(io::read_text_file(dir / "a" / "occlusion.csv") == io::read_text_file(dir / "b" / "occlusion.csv"));

  const RunConfig other = with_value(cfg, "seed", 5);
  run_classification(other, io::OutputDir(dir / "c"));
  CHECK(io::read_file(dir / "a" / kClassifierFile) != io::read_file(dir / "c" / kClassifierFile));
}

TEST_CASE("mra augmentation keeps the autoencoder frozen and counts calls") {
  test::TempDir dir("classify_mra");
  const RunConfig cfg = tiny_classify_config({{"augment", {{"augmentor", "mra"}}}});
  const auto ae = shared_autoencoder();
  const ClassificationResult r = run_classification(cfg, io::OutputDir(dir / "run"), load_run_dataset(cfg), ae);
  CHECK(r.augment_calls == 48 * 2);
  CHECK(r.augmentor_digest_before == r.augmentor_digest_after);
  CHECK_FALSE(r.probe_digest.empty());
  REQUIRE(r.occlusion.has_value());
  CHECK(r.occlusion->size() == 3);

  const RunConfig none = tiny_classify_config({{"augment", {{"augmentor", "none"}}}});
  CHECK(probe_digest(none, load_run_dataset(none), nullptr) != r.probe_digest);
}

TEST_CASE("mra augmentation without an autoencoder is a config error") {
  test::TempDir dir("classify_missing");
  for (const char* kind : {"mra", "mra_mask_only", "mra+cutmix"}) {
    const RunConfig cfg = tiny_classify_config({{"augment", {{"augmentor", kind}}}});
    CHECK_ERROR_KIND(run_classification(cfg, io::OutputDir(dir / kind)), ErrorKind::config);
  }
  const RunConfig missing = tiny_classify_config({{"augment", {{"augmentor", "mra"}}},
                                                  {"checkpoint", (dir / "absent.ckpt").string()}});
  CHECK_ERROR_KIND(run_classification(missing, io::OutputDir(dir / "absent")), ErrorKind::io);
}

TEST_CASE("occlusion window keeps only the centered square") {
  Rng rng = make_rng(4);
  const Image img = test::random_image(rng, 8, 8, 3);
  CHECK(occlude_outside_center(img, 8) == img);
  CHECK(occlude_outside_center(img, 0).pixels().isZero());
  const Image w = occlude_outside_center(img, 4);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool inside = y >= 2 && y < 6 && x >= 2 && x < 6;
      for (int c = 0; c < 3; ++c) CHECK(w(y, x, c) == (inside ? img(y, x, c) : 0.0f));
    }
  }
  const Image odd = occlude_outside_center(img, 3);
  CHECK(odd(2, 2, 0) == img(2, 2, 0));
  CHECK(odd(4, 4, 0) == img(4, 4, 0));
  CHECK(odd(5, 5, 0) == 0.0f);
  CHECK_ERROR_KIND(occlude_outside_center(img, -1), ErrorKind::validation);
  CHECK_ERROR_KIND(occlude_outside_center(img, 9), ErrorKind::validation);
}

TEST_CASE("occlusion curve anchors") {
  CHECK(resolve_hole_sizes({}, 32) == std::vector<int>{0, 4, 8, 12, 16, 20, 24, 28, 32});
  CHECK(resolve_hole_sizes({4, 2}, 32) == std::vector<int>{4, 2});

  test::TempDir dir("occlusion");
  const RunConfig cfg = tiny_classify_config({{"eval", {{"occlusion_after_train", false}}}});
  const io::Dataset data = load_run_dataset(cfg);
  const ClassificationResult r = run_classification(cfg, io::OutputDir(dir / "run"), data);
  const OcclusionCurve curve = evaluate_occlusion(*r.model, data.eval, {16, 0});
  REQUIRE(curve.size() == 2);
  const double plain = evaluate_accuracy(*r.model, data.eval.images, data.eval.labels);
  CHECK(curve[0].accuracy == plain);
  CHECK(curve[0].error == doctest::Approx(1.0 - plain));
  CHECK(plain == doctest::Approx(r.metrics.final_eval_acc().value_or(-1.0)));
  CHECK(occlusion_to_csv(curve).rfind("hole_size,error,accuracy\n16,", 0) == 0);
  CHECK_ERROR_KIND(evaluate_occlusion(*r.model, data.eval, {17}), ErrorKind::validation);
}

TEST_CASE("ablation arms differ from the reference in one key") {
  RunConfig base = tiny_classify_config({{"task", "ablate"}, {"ablation", {{"suite", "reconstruction"}}}});
  auto arms = plan_ablation(base);
  REQUIRE(arms.size() == 4);
  std::vector<std::string> names;
  for (const auto& arm : arms) {
    names.push_back(arm.name);
    CHECK(arm.diff.size() <= 1);
    CHECK_FALSE(arm.own_pretraining);
  }
  CHECK(names == std::vector<std::string>{"baseline", "cutout", "mra_mask_only", "mra"});

  base = tiny_classify_config({{"task", "ablate"}, {"ablation", {{"suite", "mask_strategy"}}}});
  arms = plan_ablation(base);
  REQUIRE(arms.size() == 4);
  for (const auto& arm : arms) CHECK(arm.diff.size() <= 1);

  base = tiny_classify_config(
      {{"task", "ablate"}, {"augment", {{"augmentor", "mra"}}}, {"ablation", {{"suite", "mask_ratio"}}}});
  arms = plan_ablation(base);
  REQUIRE(arms.size() == 4);
  for (const auto& arm : arms) {
    CHECK(arm.own_pretraining);
    CHECK(arm.diff.size() <= 1);
    CHECK(arm.swept_key == "pretrain.mask_ratio");
  }
  CHECK(arms[2].config.pretrain.mask_ratio == doctest::Approx(0.6));

  CHECK_ERROR_KIND(plan_ablation(tiny_classify_config({{"ablation", {{"suite", "mask_ratio"}}}})), ErrorKind::config);
  CHECK_ERROR_KIND(plan_ablation(tiny_classify_config({{"augment", {{"augmentor", "mra"}, {"mask_ratio", 0.3}}},
                                                       {"ablation", {{"suite", "mask_ratio"}}}})),
                   ErrorKind::config);
  CHECK_ERROR_KIND(plan_ablation(tiny_classify_config({{"augment", {{"augmentor", "mra"}}},
                                                       {"checkpoint", "x.ckpt"},
                                                       {"ablation", {{"suite", "pretrain_epochs"}}}})),
                   ErrorKind::config);
}

TEST_CASE("a failing ablation arm is recorded and the rest complete") {
  test::TempDir dir("ablation_partial");
  const RunConfig base = tiny_classify_config({
      {"task", "ablate"},
      {"data", {{"image_size", 20}, {"train_size", 24}, {"eval_size", 16}}},
      {"augment", {{"augmentor", "mra"}}},
      {"classify", {{"epochs", 1}}},
      {"eval", {{"occlusion_hole_sizes", {0, 20}}}},
      {"ablation", {{"suite", "model_size"}, {"seeds", {0}}, {"model_presets", {"mae-tiny-test", "mae-mini"}}}},
  });
  const AblationResult r = run_ablation(base, io::OutputDir(dir / "abl"));
  REQUIRE(r.arms.size() == 2);
  CHECK(r.arms[0].ok);
  CHECK(r.arms[0].runs.size() == 1);
  CHECK_FALSE(r.arms[1].ok);
  CHECK_MESSAGE(r.arms[1].error.find("patch size") != std::string::npos, r.arms[1].error);
  const std::string csv = io::read_text_file(dir / "abl" / "comparison.csv");
  CHECK(csv.find(",ok,") != std::string::npos);
  CHECK(csv.find(",failed,") != std::string::npos);
  CHECK(io::verify_manifest(dir / "abl").empty());
}
