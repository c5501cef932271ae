#include <doctest.h>

#include <cmath>

#include "mra/classify/resnet_mini.hpp"
#include "mra/nn/conv.hpp"
#include "mra/nn/group_norm.hpp"
#include "mra/nn/functional.hpp"
#include "mra/nn/optimizer.hpp"
#include "mra/nn/transformer_block.hpp"
#include "mra/tensor.hpp"
#include "support/gradcheck.hpp"
#include "support/helpers.hpp"

using namespace mra;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Weighted sum of outputs: its gradient with respect to the output is `r`.
double projected(const MatrixXd& y, const MatrixXd& r) { return (y.array() * r.array()).sum(); }

void randomize(const nn::ParameterList<double>& params, Rng& rng, double scale) {
  for (auto* p : params) p->value = test::random_matrix(rng, p->value.rows(), p->value.cols(), scale);
}

}  // namespace

TEST_CASE("softmax examples") {
  const VectorXd half = nn::softmax(VectorXd::Zero(2));
  CHECK(half(0) == doctest::Approx(0.5));
  CHECK(half(1) == doctest::Approx(0.5));

  VectorXd logs(3);
  logs << std::log(1.0), std::log(2.0), std::log(3.0);
  const VectorXd p = nn::softmax(logs);
  CHECK(std::abs(p(0) - 1.0 / 6.0) < 1e-12);
  CHECK(std::abs(p(1) - 2.0 / 6.0) < 1e-12);
  CHECK(std::abs(p(2) - 3.0 / 6.0) < 1e-12);
}

TEST_CASE("softmax sums to one and is shift invariant") {
  Rng rng = make_rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd s = test::random_matrix(rng, 7, 1, 10.0);
    const VectorXd p = nn::softmax(s);
    CHECK(std::abs(p.sum() - 1.0) < 1e-6);
    CHECK((p.array() > 0.0).all());
    const VectorXd shifted = nn::softmax((s.array() + 123.5).matrix());
    CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-6);
  }
  VectorXd huge(2);
  huge << 1000.0, 1000.0;
  CHECK(nn::softmax(huge)(0) == doctest::Approx(0.5));
}

TEST_CASE("mse examples") {
  Rng rng = make_rng(2);
  const MatrixXd t = test::random_matrix(rng, 4, 6);
  CHECK(nn::mse_loss<double>(t, t) == 0.0);
  CHECK(nn::mse_loss<double>((t.array() + 1.0).matrix(), t) == doctest::Approx(1.0));

  MatrixXd w = MatrixXd::Zero(4, 6);
  w.topRows(2).setOnes();
  MatrixXd pred = t;
  pred.topRows(2).array() += 2.0;
  CHECK(nn::mse_loss<double>(pred, t, &w) == doctest::Approx(4.0));

  CHECK_ERROR_KIND(nn::mse_loss<double>(MatrixXd::Zero(2, 3), MatrixXd::Zero(3, 2)),
                   ErrorKind::validation);
  const MatrixXd zero_w = MatrixXd::Zero(4, 6);
  CHECK_ERROR_KIND(nn::mse_loss<double>(pred, t, &zero_w), ErrorKind::validation);
}

TEST_CASE("mse gradient") {
  Rng rng = make_rng(3);
  MatrixXd pred = test::random_matrix(rng, 3, 5);
  const MatrixXd t = test::random_matrix(rng, 3, 5);
  MatrixXd w = MatrixXd::Zero(3, 5);
  w.row(1).setOnes();
  w(2, 2) = 1.0;
  MatrixXd grad;
  nn::mse_loss<double>(pred, t, &w, &grad);
  const double err =
      test::check_input_gradient(pred, grad, [&] { return nn::mse_loss<double>(pred, t, &w); });
  CHECK(err < 1e-4);
}

TEST_CASE("cross entropy gradient and value") {
  MatrixXd logits = MatrixXd::Zero(1, 4);
  MatrixXd onehot = MatrixXd::Zero(1, 4);
  onehot(0, 2) = 1.0;
  CHECK(nn::softmax_cross_entropy<double>(logits, onehot) == doctest::Approx(std::log(4.0)));

  Rng rng = make_rng(4);
  logits = test::random_matrix(rng, 3, 4);
  MatrixXd targets = MatrixXd::Zero(3, 4);
  targets(0, 1) = 1.0;
  targets(1, 0) = 0.3;
  targets(1, 3) = 0.7;
  targets(2, 2) = 1.0;
  MatrixXd grad;
  nn::softmax_cross_entropy<double>(logits, targets, &grad);
  const double err = test::check_input_gradient(
      logits, grad, [&] { return nn::softmax_cross_entropy<double>(logits, targets); });
  CHECK(err < 1e-4);
}

TEST_CASE("layer norm statistics") {
  Rng rng = make_rng(5);
  nn::LayerNorm<double> ln("ln", 16);
  const MatrixXd x = (test::random_matrix(rng, 10, 16, 3.0).array() + 7.0).matrix();
  const MatrixXd xhat = ln.normalize(x);
  for (Index r = 0; r < xhat.rows(); ++r) {
    const double mean = xhat.row(r).mean();
    const double var = (xhat.row(r).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-5);
  }
}

TEST_CASE("linear and layer norm gradients") {
  Rng rng = make_rng(6);
  nn::Linear<double> lin("lin", 5, 3);
  nn::LayerNorm<double> ln("ln", 3);
  nn::ParameterList<double> params;
  lin.append_parameters(params);
  ln.append_parameters(params);
  randomize(params, rng, 0.7);
  MatrixXd x = test::random_matrix(rng, 4, 5);
  const MatrixXd r = test::random_matrix(rng, 4, 3);

  auto loss = [&](bool accumulate) {
    nn::Linear<double>::Cache c1;
    nn::LayerNorm<double>::Cache c2;
    const MatrixXd y = ln.forward(lin.forward(x, &c1), &c2);
    if (accumulate) lin.backward(ln.backward(r, c2), c1);
    return projected(y, r);
  };
  const auto result = test::check_parameter_gradients(params, loss);
  CHECK_MESSAGE(result.max_relative_error < 1e-4, result.worst_parameter);

  nn::Linear<double>::Cache c1;
  nn::LayerNorm<double>::Cache c2;
  ln.forward(lin.forward(x, &c1), &c2);
  const MatrixXd dx = lin.backward(ln.backward(r, c2), c1);
  const double err = test::check_input_gradient(
      x, dx, [&] { return projected(ln.forward(lin.forward(x)), r); });
  CHECK(err < 1e-4);
}

TEST_CASE("transformer block gradient contract") {
  Rng rng = make_rng(7);
  nn::TransformerBlock<double> block("blk", 8, 2, 2);
  nn::ParameterList<double> params;
  block.append_parameters(params);
  randomize(params, rng, 0.4);
  // Two sequences of four tokens each, dim 8.
  MatrixXd x = test::random_matrix(rng, 8, 8);
  const MatrixXd r = test::random_matrix(rng, 8, 8);

  auto loss = [&](bool accumulate) {
    nn::TransformerBlock<double>::Cache cache;
    const MatrixXd y = block.forward(x, 4, &cache);
    if (accumulate) block.backward(r, cache);
    return projected(y, r);
  };
  const auto result = test::check_parameter_gradients(params, loss);
  CHECK_MESSAGE(result.max_relative_error < 1e-4, result.worst_parameter);

  nn::TransformerBlock<double>::Cache cache;
  block.forward(x, 4, &cache);
  nn::zero_grads(params);
  const MatrixXd dx = block.backward(r, cache);
  const double err =
      test::check_input_gradient(x, dx, [&] { return projected(block.forward(x, 4), r); });
  CHECK(err < 1e-4);
}

TEST_CASE("transformer block shape and identity") {
  Rng rng = make_rng(8);
  nn::TransformerBlock<double> single("one", 4, 1);
  single.init(rng);
  const MatrixXd token = test::random_matrix(rng, 1, 4);
  const MatrixXd out = single.forward(token, 1);
  CHECK(out.rows() == 1);
  CHECK(out.cols() == 4);

  nn::TransformerBlock<double> block("id", 8, 2);
  block.init(rng);
  block.attn.proj.weight.value.setZero();
  block.mlp.fc2.weight.value.setZero();
  const MatrixXd x = test::random_matrix(rng, 6, 8);
  CHECK((block.forward(x, 3) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transformer block errors") {
  CHECK_ERROR_KIND(nn::TransformerBlock<double>("bad", 6, 4), ErrorKind::validation);
  Rng rng = make_rng(9);
  nn::TransformerBlock<double> block("enc.blocks.3", 4, 2);
  block.init(rng);
  CHECK_ERROR_KIND(block.forward(MatrixXd::Zero(2, 5), 2), ErrorKind::validation);
  MatrixXd x = MatrixXd::Ones(2, 4);
  x(0, 0) = std::numeric_limits<double>::infinity();
  try {
    block.forward(x, 2);
    FAIL("expected numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
    CHECK(std::string(e.what()).find("enc.blocks.3") != std::string::npos);
  }
}

TEST_CASE("attention record exposes queries and keys") {
  Rng rng = make_rng(10);
  nn::MultiHeadAttention<double> attn("a", 8, 2);
  attn.init(rng, 0.5);
  const MatrixXd x = test::random_matrix(rng, 6, 8);
  nn::AttentionRecord<double> rec;
  attn.forward(x, 3, nullptr, &rec);
  CHECK(rec.batch == 2);
  CHECK(rec.seq_len == 3);
  CHECK(rec.num_heads == 2);
  CHECK(rec.head_dim == 4);
  const MatrixXd qkv = x * attn.qkv.weight.value + attn.qkv.bias.value.replicate(6, 1);
  CHECK((rec.queries - qkv.leftCols(8)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rec.keys - qkv.middleCols(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("attention matches a per-token reference") {
  Rng rng = make_rng(11);
  nn::MultiHeadAttention<double> attn("a", 4, 2);
  attn.init(rng, 0.5);
  const MatrixXd x = test::random_matrix(rng, 3, 4);
  const MatrixXd y = attn.forward(x, 3);
  const MatrixXd qkv = x * attn.qkv.weight.value + attn.qkv.bias.value.replicate(3, 1);
  MatrixXd mixed(3, 4);
  for (int h = 0; h < 2; ++h) {
    for (int i = 0; i < 3; ++i) {
      double w[3];
      double total = 0.0;
      for (int j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (int d = 0; d < 2; ++d) dot += qkv(i, h * 2 + d) * qkv(j, 4 + h * 2 + d);
        w[j] = std::exp(dot / std::sqrt(2.0));
        total += w[j];
      }
      for (int d = 0; d < 2; ++d) {
        double acc = 0.0;
        for (int j = 0; j < 3; ++j) acc += w[j] / total * qkv(j, 8 + h * 2 + d);
        mixed(i, h * 2 + d) = acc;
      }
    }
  }
  const MatrixXd expected = mixed * attn.proj.weight.value + attn.proj.bias.value.replicate(3, 1);
  CHECK((y - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conv network gradient contract") {
  Rng rng = make_rng(12);
  nn::Conv2d<double> conv1("c1", 2, 3, 3, 1, 1);
  nn::Conv2d<double> conv2("c2", 3, 4, 3, 2, 1);
  nn::ParameterList<double> params;
  conv1.append_parameters(params);
  conv2.append_parameters(params);
  randomize(params, rng, 0.5);
  nn::FeatureBatch<double> x(2, 2, 5, 5);
  x.data = test::random_matrix(rng, 2, 50);
  MatrixXd targets = MatrixXd::Zero(2, 4);
  targets(0, 1) = 1.0;
  targets(1, 3) = 1.0;

  auto loss = [&](bool accumulate) {
    nn::Conv2d<double>::Cache c1, c2;
    const auto h = nn::relu(conv1.forward(x, &c1));
    const auto z = conv2.forward(h, &c2);
    const MatrixXd logits = nn::global_average_pool(z);
    MatrixXd dlogits;
    const double l = nn::softmax_cross_entropy<double>(logits, targets, &dlogits);
    if (accumulate) {
      const auto dz = nn::global_average_pool_backward<double>(dlogits, z.batch, z.channels,
                                                               z.height, z.width);
      conv1.backward(nn::relu_backward(conv2.backward(dz, c2), h), c1);
    }
    return l;
  };
  const auto result = test::check_parameter_gradients(params, loss, 1e-6);
  CHECK_MESSAGE(result.max_relative_error < 1e-4, result.worst_parameter);
}

TEST_CASE("group norm statistics per sample and group") {
  Rng rng = make_rng(31);
  nn::GroupNorm<double> norm("gn", 6, 3);
  nn::FeatureBatch<double> x(2, 6, 3, 4);
  x.data = test::random_matrix(rng, 6, 24, 3.0);
  x.data.array() += 5.0;
  const auto y = norm.forward(x);
  for (int b = 0; b < 2; ++b) {
    for (int g = 0; g < 3; ++g) {
      const MatrixXd block = y.data.block(2 * g, 12 * b, 2, 12);
      CHECK(std::abs(block.mean()) < 1e-12);
      CHECK(std::abs(block.array().square().mean() - 1.0) < 1e-4);
    }
  }
  CHECK_ERROR_KIND(nn::GroupNorm<double>("bad", 6, 4), ErrorKind::validation);
}

TEST_CASE("group norm gradient contract") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng = make_rng(40 + seed);
    nn::GroupNorm<double> norm("gn", 4, 2);
    nn::ParameterList<double> params;
    norm.append_parameters(params);
    randomize(params, rng, 1.0);
    nn::FeatureBatch<double> x(2, 4, 3, 3);
    x.data = test::random_matrix(rng, 4, 18, 2.0);
    const MatrixXd r = test::random_matrix(rng, 4, 18);
    nn::FeatureBatch<double> dx;
    auto loss = [&](bool accumulate) {
      nn::GroupNorm<double>::Cache cache;
      const auto y = norm.forward(x, &cache);
      if (accumulate) {
        nn::FeatureBatch<double> dy = y;
        dy.data = r;
        dx = norm.backward(dy, cache);
      }
      return projected(y.data, r);
    };
    const auto result = test::check_parameter_gradients(params, loss, 1e-5);
    CHECK_MESSAGE(result.max_relative_error < 1e-4, result.worst_parameter);
    nn::zero_grads(params);
    loss(true);
    const double input_error = test::check_input_gradient(x.data, dx.data, [&] { return loss(false); }, 1e-5);
    CHECK(input_error < 1e-4);
  }
}

TEST_CASE("residual classifier gradient contract") {
  Rng rng = make_rng(50);
  classify::ClassifierConfig config{.image_size = 8, .channels = 2, .num_classes = 3,
                                    .width1 = 8, .width2 = 8, .width3 = 8};
  classify::ResNetMini<double> model(config);
  model.init(rng);
  auto params = model.parameters();
  for (auto* p : params) {
    if (p->name.find("norm") != std::string::npos) {
      p->value.array() += test::random_matrix(rng, p->value.rows(), p->value.cols(), 0.2).array();
    }
  }
  model.head.weight.value = test::random_matrix(rng, model.head.weight.value.rows(), model.head.weight.value.cols());
  nn::FeatureBatch<double> x(2, 2, 8, 8);
  x.data = test::random_matrix(rng, 2, 128);
  MatrixXd targets = MatrixXd::Zero(2, 3);
  targets(0, 2) = 1.0;
  targets(1, 0) = 0.3;
  targets(1, 1) = 0.7;
  auto loss = [&](bool accumulate) {
    classify::ResNetMini<double>::Cache cache;
    const MatrixXd logits = model.forward(x, &cache);
    MatrixXd dlogits;
    const double l = nn::softmax_cross_entropy<double>(logits, targets, &dlogits);
    if (accumulate) model.backward(dlogits, cache);
    return l;
  };
  const auto result = test::check_parameter_gradients(params, loss, 1e-5);
  CHECK_MESSAGE(result.max_relative_error < 1e-4, result.worst_parameter);
}

TEST_CASE("conv matches a direct convolution") {
  Rng rng = make_rng(13);
  nn::Conv2d<double> conv("c", 2, 3, 3, 2, 1);
  conv.init(rng);
  conv.bias.value = test::random_matrix(rng, 3, 1);
  nn::FeatureBatch<double> x(1, 2, 5, 4);
  x.data = test::random_matrix(rng, 2, 20);
  const auto y = conv.forward(x);
  CHECK(y.height == 3);
  CHECK(y.width == 2);
  for (int o = 0; o < 3; ++o)
    for (int oy = 0; oy < 3; ++oy)
      for (int ox = 0; ox < 2; ++ox) {
        double acc = conv.bias.value(o, 0);
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx)
            for (int c = 0; c < 2; ++c) {
              const int iy = oy * 2 - 1 + ky;
              const int ix = ox * 2 - 1 + kx;
              if (iy < 0 || iy >= 5 || ix < 0 || ix >= 4) continue;
              acc += conv.weight.value(o, (ky * 3 + kx) * 2 + c) * x.data(c, x.column(0, iy, ix));
            }
        CHECK(std::abs(y.data(o, y.column(0, oy, ox)) - acc) < 1e-12);
      }
}

TEST_CASE("optimizer examples") {
  nn::Parameter<double> p("w.weight", 1, 1);
  p.value(0, 0) = 1.0;

  nn::Optimizer<double> plain({.kind = nn::OptimizerKind::sgd, .learning_rate = 0.1, .momentum = 0.0});
  p.grad(0, 0) = 0.0;
  plain.step({&p});
  CHECK(p.value(0, 0) == 1.0);
  p.grad(0, 0) = 1.0;
  plain.step({&p});
  CHECK(p.value(0, 0) == doctest::Approx(0.9));

  p.value(0, 0) = 0.0;
  nn::Optimizer<double> momentum({.kind = nn::OptimizerKind::sgd, .learning_rate = 0.1, .momentum = 0.9});
  momentum.step({&p});
  CHECK(p.value(0, 0) == doctest::Approx(-0.1));
  momentum.step({&p});
  CHECK(p.value(0, 0) == doctest::Approx(-0.29));
  CHECK(momentum.slots().at("w.weight").first(0, 0) == doctest::Approx(1.9));
}

TEST_CASE("optimizer refuses non-finite gradients") {
  nn::Parameter<double> a("a.weight", 2, 2);
  nn::Parameter<double> b("b.weight", 1, 1);
  a.value.setOnes();
  b.value.setOnes();
  a.grad.setOnes();
  b.grad(0, 0) = std::nan("");
  for (auto kind : {nn::OptimizerKind::sgd, nn::OptimizerKind::adamw}) {
    nn::Optimizer<double> opt({.kind = kind, .learning_rate = 0.1});
    CHECK_ERROR_KIND(opt.step({&a, &b}), ErrorKind::numeric);
    CHECK(a.value.isOnes());
    CHECK(opt.step_count() == 0);
  }
}

TEST_CASE("adamw first step and decay") {
  nn::Parameter<double> w("w.weight", 1, 1);
  nn::Parameter<double> bias("w.bias", 1, 1, false);
  w.value(0, 0) = 2.0;
  bias.value(0, 0) = 2.0;
  w.grad(0, 0) = 0.5;
  bias.grad(0, 0) = 0.5;
  nn::Optimizer<double> opt({.kind = nn::OptimizerKind::adamw, .learning_rate = 0.01,
                             .weight_decay = 0.1, .beta1 = 0.9, .beta2 = 0.95, .epsilon = 0.0});
  opt.step({&w, &bias});
  // The bias-corrected first step moves by exactly lr * sign(g).
  CHECK(bias.value(0, 0) == doctest::Approx(1.99));
  CHECK(w.value(0, 0) == doctest::Approx(2.0 * (1.0 - 0.001) - 0.01));
}

TEST_CASE("determinism") {
  auto run = [] {
    Rng rng = make_rng(21);
    nn::TransformerBlock<float> block("b", 16, 4);
    block.init(rng);
    Rng data = make_rng(22);
    std::normal_distribution<float> dist;
    Matrix<float> x(10, 16);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = dist(data);
    return block.forward(x, 5);
  };
  const Matrix<float> a = run();
  const Matrix<float> b = run();
  CHECK(std::memcmp(a.data(), b.data(), sizeof(float) * a.size()) == 0);
}

TEST_CASE("xavier uniform init stays inside its bound") {
  Rng rng = make_rng(60);
  Matrix<double> w(48, 128);
  nn::fill_xavier_uniform(w, rng);
  const double bound = std::sqrt(6.0 / (48 + 128));
  CHECK(w.cwiseAbs().maxCoeff() <= bound);
  CHECK(w.cwiseAbs().maxCoeff() > 0.9 * bound);
  CHECK(std::abs(w.mean()) < 0.01);
  CHECK(w.array().square().mean() == doctest::Approx(bound * bound / 3.0).epsilon(0.05));
}

TEST_CASE("tensor spec") {
  TensorSpec ok{{2, 3, 4}, DType::f64};
  CHECK(ok.element_count() == 24);
  CHECK_NOTHROW(ok.validate());
  CHECK_ERROR_KIND((TensorSpec{{2, 0}, DType::f32}.validate()), ErrorKind::validation);
  CHECK_ERROR_KIND((TensorSpec{{1000, 1000}, DType::f32}.validate(1000)), ErrorKind::validation);
  CHECK(parse_dtype("f64") == DType::f64);
  CHECK(dtype_size(DType::f32) == 4);
}
