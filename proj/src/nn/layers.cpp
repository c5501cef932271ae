#include "mra/nn/conv.hpp"
#include "mra/nn/group_norm.hpp"
#include "mra/nn/optimizer.hpp"
#include "mra/nn/transformer_block.hpp"

namespace mra::nn {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::sgd ? "sgd" : "adamw";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adamw") return OptimizerKind::adamw;
  fail(ErrorKind::config, "unknown optimizer '" + std::string(name) + "' (expected sgd|adamw)");
}

template class Linear<float>;
template class Linear<double>;
template class LayerNorm<float>;
template class LayerNorm<double>;
template class MultiHeadAttention<float>;
template class MultiHeadAttention<double>;
template class Mlp<float>;
template class Mlp<double>;
template class TransformerBlock<float>;
template class TransformerBlock<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template class GroupNorm<float>;
template class GroupNorm<double>;
template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace mra::nn
