#include "mra/harness/run_config.hpp"

#include <map>
#include <set>

#include "mra/error.hpp"
#include "mra/hash.hpp"
#include "mra/io/files.hpp"
#include "mra/mae/config.hpp"

namespace mra::harness {

using nlohmann::json;

namespace {

// Keys whose default is null, with the type a non-null value must have.
const std::map<std::string, json::value_t>& nullable_keys() {
  static const std::map<std::string, json::value_t> keys = {
      {"checkpoint", json::value_t::string},
      {"pretrain.max_steps", json::value_t::number_integer},
      {"augment.mask_ratio", json::value_t::number_float},
  };
  return keys;
}

bool type_matches(json::value_t expected, const json& value) {
  switch (expected) {
    case json::value_t::number_float: return value.is_number();
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return value.is_number_integer();
    case json::value_t::string: return value.is_string();
    case json::value_t::boolean: return value.is_boolean();
    case json::value_t::object: return value.is_object();
    case json::value_t::array: return value.is_array();
    default: return false;
  }
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void merge_checked(json& target, const json& user, const std::string& prefix) {
  if (!user.is_object()) fail(ErrorKind::config, "config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = join(prefix, key);
    if (!target.contains(key)) fail(ErrorKind::config, "unknown config key '" + path + "'");
    json& slot = target[key];
    if (slot.is_object()) {
      merge_checked(slot, value, path);
      continue;
    }
    const auto nullable = nullable_keys().find(path);
    if (nullable != nullable_keys().end()) {
      if (!value.is_null() && !type_matches(nullable->second, value)) {
        fail(ErrorKind::config, "config key '" + path + "' has the wrong type");
      }
      slot = value;
      continue;
    }
    if (!type_matches(slot.type(), value)) {
      fail(ErrorKind::config, "config key '" + path + "' must be a " + std::string(slot.type_name()) +
                                  ", got " + value.type_name());
    }
    if (slot.is_array() && !slot.empty()) {
      for (const auto& element : value) {
        if (!type_matches(slot.front().type(), element)) {
          fail(ErrorKind::config, "config key '" + path + "' has an element of the wrong type");
        }
      }
    }
    slot = value;
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) fail(ErrorKind::config, message);
}

LrSchedule parse_schedule(const std::string& name) {
  if (name == "step") return LrSchedule::step;
  if (name == "cosine") return LrSchedule::cosine;
  if (name == "constant") return LrSchedule::constant;
  fail(ErrorKind::config, "unknown learning-rate schedule '" + name + "' (expected step|cosine|constant)");
}

nn::OptimizerConfig optimizer_from(const json& section) {
  nn::OptimizerConfig c;
  c.kind = nn::parse_optimizer_kind(section.at("optimizer").get<std::string>());
  c.learning_rate = section.at("learning_rate").get<double>();
  c.momentum = section.at("momentum").get<double>();
  c.weight_decay = section.at("weight_decay").get<double>();
  c.beta1 = section.at("beta1").get<double>();
  c.beta2 = section.at("beta2").get<double>();
  return c;
}

void flatten(const json& value, const std::string& prefix, std::map<std::string, json>& out) {
  if (value.is_object() && !value.empty()) {
    for (const auto& [key, child] : value.items()) flatten(child, join(prefix, key), out);
  } else {
    out[prefix] = value;
  }
}

}  // namespace

std::string_view to_string(AblationSuite suite) {
  switch (suite) {
    case AblationSuite::mask_ratio: return "mask_ratio";
    case AblationSuite::mask_strategy: return "mask_strategy";
    case AblationSuite::reconstruction: return "reconstruction";
    case AblationSuite::pretrain_epochs: return "pretrain_epochs";
    case AblationSuite::model_size: return "model_size";
  }
  return "unknown";
}

std::vector<std::string> ablation_suite_names() {
  return {"mask_ratio", "mask_strategy", "reconstruction", "pretrain_epochs", "model_size"};
}

AblationSuite parse_ablation_suite(std::string_view name) {
  for (auto suite : {AblationSuite::mask_ratio, AblationSuite::mask_strategy, AblationSuite::reconstruction,
                     AblationSuite::pretrain_epochs, AblationSuite::model_size}) {
    if (to_string(suite) == name) return suite;
  }
  fail(ErrorKind::config, "unknown ablation suite '" + std::string(name) + "'");
}

json default_run_config() {
  return {
      {"schema_version", kRunConfigSchemaVersion},
      {"task", "classify"},
      {"seed", 0},
      {"deterministic", true},
      {"output_dir", "runs/default"},
      {"checkpoint", nullptr},
      {"model_preset", "mae-mini-desk"},
      {"data", {{"source", "synthetic:shapes10"}, {"train_size", 0}, {"eval_size", 0},
                {"image_size", 0}, {"num_classes", 0}}},
      {"pretrain", {{"epochs", 200}, {"batch_size", 32}, {"max_steps", nullptr},
                    {"mask_ratio", 0.4}, {"loss_support", "masked"}, {"norm_pix_loss", false},
                    {"optimizer", "adamw"}, {"learning_rate", 1e-3}, {"min_learning_rate", 0.0},
                    {"weight_decay", 0.05}, {"momentum", 0.9}, {"beta1", 0.9}, {"beta2", 0.95},
                    {"warmup_fraction", 0.05}, {"checkpoint_every", 0}}},
      {"classify", {{"epochs", 30}, {"batch_size", 64}, {"optimizer", "sgd"},
                    {"learning_rate", 0.05}, {"momentum", 0.9}, {"weight_decay", 5e-4},
                    {"beta1", 0.9}, {"beta2", 0.999}, {"schedule", "step"},
                    {"classifier", "resnet-mini-desk"}, {"crop_padding", 4}, {"flip", true}}},
      {"augment", {{"augmentor", "none"}, {"strategy", "mask_low"}, {"mask_ratio", nullptr},
                   {"apply_probability", 1.0}, {"score_scaling", "raw"},
                   {"head_aggregation", "mean"}, {"cutout_hole", 16}, {"mixup_alpha", 0.2},
                   {"cutmix_alpha", 1.0}}},
      {"eval", {{"occlusion_hole_sizes", json::array()}, {"occlusion_after_train", true},
                {"probe_batch", 8}}},
      {"ablation", {{"suite", "mask_strategy"}, {"seeds", {0, 1, 2}},
                    {"mask_ratios", {0.2, 0.4, 0.6, 0.8}}, {"pretrain_epochs", {100, 200, 800}},
                    {"model_presets", {"mae-mini-desk", "mae-base-desk", "mae-large-desk"}}}},
  };
}

RunConfig parse_run_config(const json& user) {
  json doc = default_run_config();
  merge_checked(doc, user, "");
  require(doc.at("schema_version").get<int>() == kRunConfigSchemaVersion,
          "config schema_version " + doc.at("schema_version").dump() + " is not supported (expected " +
              std::to_string(kRunConfigSchemaVersion) + ")");
  for (const auto& h : doc.at("eval").at("occlusion_hole_sizes")) {
    require(h.is_number_integer(), "eval.occlusion_hole_sizes must hold integers");
  }
  for (const auto& s : doc.at("ablation").at("seeds")) {
    require(s.is_number_integer() && s.get<std::int64_t>() >= 0, "ablation.seeds must hold non-negative integers");
  }

  RunConfig c;
  c.document = doc;
  c.task = doc.at("task").get<std::string>();
  require(c.task == "pretrain" || c.task == "classify" || c.task == "ablate",
          "task must be pretrain, classify or ablate");
  require(doc.at("seed").get<std::int64_t>() >= 0, "seed must be non-negative");
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.deterministic = doc.at("deterministic").get<bool>();
  c.output_dir = doc.at("output_dir").get<std::string>();
  if (!doc.at("checkpoint").is_null()) c.checkpoint = doc.at("checkpoint").get<std::string>();
  c.model_preset = doc.at("model_preset").get<std::string>();
  mae::mae_preset(c.model_preset);

  const json& d = doc.at("data");
  c.data.source = d.at("source").get<std::string>();
  c.data.train_size = d.at("train_size").get<int>();
  c.data.eval_size = d.at("eval_size").get<int>();
  c.data.image_size = d.at("image_size").get<int>();
  c.data.num_classes = d.at("num_classes").get<int>();
  require(c.data.train_size >= 0 && c.data.eval_size >= 0 && c.data.image_size >= 0 &&
              c.data.num_classes >= 0,
          "data sizes must be non-negative");

  const json& p = doc.at("pretrain");
  c.pretrain.epochs = p.at("epochs").get<int>();
  c.pretrain.batch_size = p.at("batch_size").get<int>();
  if (!p.at("max_steps").is_null()) c.pretrain.max_steps = p.at("max_steps").get<std::int64_t>();
  c.pretrain.mask_ratio = p.at("mask_ratio").get<double>();
  c.pretrain.loss_support = p.at("loss_support").get<std::string>();
  mae::parse_loss_support(c.pretrain.loss_support);
  c.pretrain.norm_pix_loss = p.at("norm_pix_loss").get<bool>();
  c.pretrain.optimizer = optimizer_from(p);
  c.pretrain.min_learning_rate = p.at("min_learning_rate").get<double>();
  c.pretrain.warmup_fraction = p.at("warmup_fraction").get<double>();
  c.pretrain.checkpoint_every = p.at("checkpoint_every").get<std::int64_t>();
  require(c.pretrain.epochs >= 1, "pretrain.epochs must be >= 1");
  require(c.pretrain.batch_size >= 1, "pretrain.batch_size must be >= 1");
  require(!c.pretrain.max_steps || *c.pretrain.max_steps >= 1, "pretrain.max_steps must be >= 1");
  require(c.pretrain.mask_ratio >= 0.0 && c.pretrain.mask_ratio < 1.0, "pretrain.mask_ratio must lie in [0, 1)");
  require(c.pretrain.warmup_fraction >= 0.0 && c.pretrain.warmup_fraction < 1.0,
          "pretrain.warmup_fraction must lie in [0, 1)");
  require(c.pretrain.checkpoint_every >= 0, "pretrain.checkpoint_every must be >= 0");
  require(c.pretrain.optimizer.learning_rate > 0.0, "pretrain.learning_rate must be positive");

  const json& k = doc.at("classify");
  c.classify.epochs = k.at("epochs").get<int>();
  c.classify.batch_size = k.at("batch_size").get<int>();
  c.classify.optimizer = optimizer_from(k);
  c.classify.schedule = parse_schedule(k.at("schedule").get<std::string>());
  c.classify.classifier = k.at("classifier").get<std::string>();
  c.classify.crop_padding = k.at("crop_padding").get<int>();
  c.classify.flip = k.at("flip").get<bool>();
  require(c.classify.epochs >= 1, "classify.epochs must be >= 1");
  require(c.classify.batch_size >= 1, "classify.batch_size must be >= 1");
  require(c.classify.crop_padding >= 0, "classify.crop_padding must be >= 0");
  require(c.classify.optimizer.learning_rate > 0.0, "classify.learning_rate must be positive");

  const json& a = doc.at("augment");
  c.augment.augmentor = augment::parse_augmentor_kind(a.at("augmentor").get<std::string>());
  c.augment.strategy = masking::parse_mask_strategy(a.at("strategy").get<std::string>());
  if (!a.at("mask_ratio").is_null()) c.augment.mask_ratio = a.at("mask_ratio").get<double>();
  c.augment.apply_probability = a.at("apply_probability").get<double>();
  c.augment.scoring.scaling = masking::parse_score_scaling(a.at("score_scaling").get<std::string>());
  c.augment.scoring.aggregation = masking::parse_head_aggregation(a.at("head_aggregation").get<std::string>());
  c.augment.cutout_hole = a.at("cutout_hole").get<int>();
  c.augment.mixup_alpha = a.at("mixup_alpha").get<double>();
  c.augment.cutmix_alpha = a.at("cutmix_alpha").get<double>();
  require(!c.augment.mask_ratio || (*c.augment.mask_ratio >= 0.0 && *c.augment.mask_ratio < 1.0),
          "augment.mask_ratio must lie in [0, 1)");
  require(c.augment.apply_probability >= 0.0 && c.augment.apply_probability <= 1.0,
          "augment.apply_probability must lie in [0, 1]");
  require(c.augment.cutout_hole >= 0, "augment.cutout_hole must be >= 0");
  require(c.augment.mixup_alpha > 0.0 && c.augment.cutmix_alpha > 0.0, "mixing alphas must be positive");

  const json& e = doc.at("eval");
  c.eval.occlusion_hole_sizes = e.at("occlusion_hole_sizes").get<std::vector<int>>();
  c.eval.occlusion_after_train = e.at("occlusion_after_train").get<bool>();
  c.eval.probe_batch = e.at("probe_batch").get<int>();
  require(c.eval.probe_batch >= 1, "eval.probe_batch must be >= 1");

  const json& ab = doc.at("ablation");
  c.ablation.suite = parse_ablation_suite(ab.at("suite").get<std::string>());
  c.ablation.seeds = ab.at("seeds").get<std::vector<std::uint64_t>>();
  c.ablation.mask_ratios = ab.at("mask_ratios").get<std::vector<double>>();
  c.ablation.pretrain_epochs = ab.at("pretrain_epochs").get<std::vector<int>>();
  c.ablation.model_presets = ab.at("model_presets").get<std::vector<std::string>>();
  require(!c.ablation.seeds.empty(), "ablation.seeds must not be empty");
  for (double r : c.ablation.mask_ratios) require(r >= 0.0 && r < 1.0, "ablation.mask_ratios must lie in [0, 1)");
  for (int ep : c.ablation.pretrain_epochs) require(ep >= 1, "ablation.pretrain_epochs must be >= 1");
  for (const auto& name : c.ablation.model_presets) mae::mae_preset(name);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = io::read_text_file(path);
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, path.string() + ": " + e.what());
  }
  return parse_run_config(user);
}

std::string RunConfig::hash() const {
  json canonical = document;
  canonical.erase("output_dir");
  return sha256_hex(canonical.dump());
}

void set_config_value(json& document, std::string_view dotted_key, json value) {
  json* node = &document;
  std::string_view rest = dotted_key;
  while (true) {
    const auto dot = rest.find('.');
    const std::string key(rest.substr(0, dot));
    if (dot == std::string_view::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    rest = rest.substr(dot + 1);
  }
}

RunConfig with_value(const RunConfig& config, std::string_view dotted_key, json value) {
  json doc = config.document;
  set_config_value(doc, dotted_key, std::move(value));
  return parse_run_config(doc);
}

std::vector<std::string> diff_keys(const json& a, const json& b) {
  std::map<std::string, json> fa, fb;
  flatten(a, "", fa);
  flatten(b, "", fb);
  std::set<std::string> keys;
  for (const auto& [k, _] : fa) keys.insert(k);
  for (const auto& [k, _] : fb) keys.insert(k);
  std::vector<std::string> out;
  for (const auto& k : keys) {
    const auto ia = fa.find(k);
    const auto ib = fb.find(k);
    if (ia == fa.end() || ib == fb.end() || ia->second != ib->second) out.push_back(k);
  }
  return out;
}

}  // namespace mra::harness
