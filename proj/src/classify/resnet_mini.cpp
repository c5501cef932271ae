#include "mra/classify/resnet_mini.hpp"

namespace mra::classify {

void ClassifierConfig::validate() const {
  if (image_size < 4 || channels < 1 || num_classes < 2 || width1 < 1 || width2 < 1 ||
      width3 < 1) {
    fail(ErrorKind::validation, "invalid classifier config");
  }
  if (width1 % kNormGroups != 0 || width2 % kNormGroups != 0 || width3 % kNormGroups != 0) {
    fail(ErrorKind::validation, "classifier widths must be multiples of " + std::to_string(kNormGroups));
  }
}

ClassifierConfig classifier_preset(std::string_view name, int image_size, int channels,
                                   int num_classes) {
  ClassifierConfig c;
  c.image_size = image_size;
  c.channels = channels;
  c.num_classes = num_classes;
  if (name == "resnet-mini-desk") return c;
  if (name == "resnet-mini-small") {
    c.width1 = 16;
    c.width2 = 32;
    c.width3 = 64;
    return c;
  }
  if (name == "resnet-mini-tiny") {
    c.width1 = 8;
    c.width2 = 16;
    c.width3 = 32;
    return c;
  }
  fail(ErrorKind::config, "unknown classifier preset '" + std::string(name) + "'");
}

nlohmann::json to_json(const ClassifierConfig& c) {
  return {{"image_size", c.image_size}, {"channels", c.channels}, {"num_classes", c.num_classes},
          {"width1", c.width1},         {"width2", c.width2},     {"width3", c.width3}};
}

ClassifierConfig classifier_config_from_json(const nlohmann::json& j) {
  try {
    ClassifierConfig c;
    c.image_size = j.at("image_size").get<int>();
    c.channels = j.at("channels").get<int>();
    c.num_classes = j.at("num_classes").get<int>();
    c.width1 = j.at("width1").get<int>();
    c.width2 = j.at("width2").get<int>();
    c.width3 = j.at("width3").get<int>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::schema, std::string("classifier config: ") + e.what());
  }
}

template <typename Scalar>
nn::FeatureBatch<Scalar> to_feature_batch(std::span<const Image> images) {
  if (images.empty()) fail(ErrorKind::validation, "empty image batch");
  const Image& first = images.front();
  nn::FeatureBatch<Scalar> out(static_cast<int>(images.size()), first.channels(), first.height(),
                               first.width());
  const Index pixels = Index(first.height()) * first.width();
  for (std::size_t b = 0; b < images.size(); ++b) {
    if (!images[b].same_shape(first)) fail(ErrorKind::geometry, "mixed image shapes in batch");
    const Eigen::Map<const Eigen::MatrixXf> hwc(images[b].pixels().data(), first.channels(), pixels);
    out.data.middleCols(Index(b) * pixels, pixels) =
        ((hwc.array() - 0.5f) / 0.25f).matrix().template cast<Scalar>();
  }
  return out;
}

template nn::FeatureBatch<float> to_feature_batch<float>(std::span<const Image>);
template nn::FeatureBatch<double> to_feature_batch<double>(std::span<const Image>);

template <typename Scalar>
std::vector<int> ResNetMini<Scalar>::predict(std::span<const Image> images) const {
  const Matrix<Scalar> logits = forward(to_feature_batch<Scalar>(images));
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index r = 0; r < logits.rows(); ++r) {
    Index best = 0;
    logits.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

template class BasicBlock<float>;
template class BasicBlock<double>;
template class ResNetMini<float>;
template class ResNetMini<double>;

}  // namespace mra::classify
