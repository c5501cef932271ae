#include "mra/harness/models.hpp"

namespace mra::harness {

mae::MaeConfig autoencoder_config(const RunConfig& config, const io::Dataset& data) {
  mae::MaeConfig c = mae::mae_preset(config.model_preset);
  const Image& sample = data.train.images.front();
  if (sample.height() != sample.width()) {
    fail(ErrorKind::geometry, "autoencoder needs square images, dataset has " + std::to_string(sample.height()) +
                                  "x" + std::to_string(sample.width()));
  }
  c.image_size = sample.height();
  c.channels = sample.channels();
  c.mask_ratio = config.pretrain.mask_ratio;
  c.loss_support = mae::parse_loss_support(config.pretrain.loss_support);
  c.norm_pix_loss = config.pretrain.norm_pix_loss;
  c.validate();
  return c;
}

classify::ClassifierConfig classifier_config(const RunConfig& config, const io::Dataset& data) {
  const Image& sample = data.train.images.front();
  return classify::classifier_preset(config.classify.classifier, sample.height(), sample.channels(),
                                     data.num_classes);
}

io::Checkpoint autoencoder_checkpoint(const mae::MaskedAutoencoder<float>& model) {
  io::Checkpoint ckpt;
  ckpt.kind = kMaeKind;
  ckpt.config = mae::to_json(model.config());
  io::store_parameters<float>(ckpt, model.parameters());
  return ckpt;
}

std::shared_ptr<mae::MaskedAutoencoder<float>> autoencoder_from_checkpoint(const io::Checkpoint& ckpt) {
  ckpt.expect_kind(kMaeKind);
  auto model = std::make_shared<mae::MaskedAutoencoder<float>>(mae::mae_config_from_json(ckpt.config));
  io::restore_parameters<float>(ckpt, model->parameters());
  return model;
}

std::shared_ptr<mae::MaskedAutoencoder<float>> load_autoencoder(const std::filesystem::path& path) {
  return autoencoder_from_checkpoint(io::load_checkpoint(path));
}

io::Checkpoint classifier_checkpoint(const classify::ResNetMini<float>& model) {
  io::Checkpoint ckpt;
  ckpt.kind = kClassifierKind;
  ckpt.config = classify::to_json(model.config());
  io::store_parameters<float>(ckpt, model.parameters());
  return ckpt;
}

classify::ResNetMini<float> classifier_from_checkpoint(const io::Checkpoint& ckpt) {
  ckpt.expect_kind(kClassifierKind);
  classify::ResNetMini<float> model(classify::classifier_config_from_json(ckpt.config));
  io::restore_parameters<float>(ckpt, model.parameters());
  return model;
}

io::Dataset load_run_dataset(const RunConfig& config) {
  io::DatasetOptions options;
  options.train_size = config.data.train_size;
  options.eval_size = config.data.eval_size;
  options.image_size = config.data.image_size;
  options.num_classes = config.data.num_classes;
  return io::load_dataset(config.data.source, options);
}

}  // namespace mra::harness
