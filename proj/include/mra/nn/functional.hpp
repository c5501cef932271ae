#pragma once

#include <cmath>
#include <numbers>

#include "mra/error.hpp"
#include "mra/tensor.hpp"

namespace mra::nn {

/// Numerically stable softmax of a column vector (max-subtracted). Uses the
/// scalar exp so equal inputs give bitwise-equal outputs; the packet exp can
/// differ by an ulp from the tail loop.
template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out = scores;
  if (out.size() == 0) return out;
  const Scalar m = out.maxCoeff();
  out = out.unaryExpr([m](Scalar v) { return std::exp(v - m); });
  return out / out.sum();
}

template <typename Scalar>
void softmax_rows_inplace(Matrix<Scalar>& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row = (row.array() - row.maxCoeff()).exp().matrix();
    row /= row.sum();
  }
}

// Exact (erf) GELU.
template <typename Scalar>
Scalar gelu(Scalar x) {
  return Scalar(0.5) * x * (Scalar(1) + std::erf(x / Scalar(std::numbers::sqrt2)));
}

template <typename Scalar>
Scalar gelu_derivative(Scalar x) {
  const Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(x / Scalar(std::numbers::sqrt2)));
  const Scalar pdf = std::exp(Scalar(-0.5) * x * x) / Scalar(std::sqrt(2.0 * std::numbers::pi));
  return cdf + x * pdf;
}

/// Weighted mean of squared differences: sum(w * (p - t)^2) / sum(w).
/// Without weights this is the plain mean. Writes d(loss)/d(pred) to grad.
template <typename Scalar>
Scalar mse_loss(const Matrix<Scalar>& pred, const Matrix<Scalar>& target,
                const Matrix<Scalar>* weights = nullptr, Matrix<Scalar>* grad = nullptr) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    fail(ErrorKind::validation, "mse_loss: prediction and target shapes differ");
  }
  if (weights != nullptr && (weights->rows() != pred.rows() || weights->cols() != pred.cols())) {
    fail(ErrorKind::validation, "mse_loss: weight shape differs from prediction");
  }
  const Matrix<Scalar> diff = pred - target;
  Scalar denom = weights ? weights->sum() : Scalar(pred.size());
  if (!(denom > Scalar(0))) fail(ErrorKind::validation, "mse_loss: weights select no elements");
  Scalar loss;
  if (weights) {
    loss = (weights->array() * diff.array().square()).sum() / denom;
    if (grad) *grad = (Scalar(2) * weights->array() * diff.array() / denom).matrix();
  } else {
    loss = diff.array().square().sum() / denom;
    if (grad) *grad = Scalar(2) * diff / denom;
  }
  return loss;
}

/// Mean over rows of -sum_j t_j log softmax(z)_j. Targets are row-stochastic
/// (one-hot or a two-label mixture).
template <typename Scalar>
Scalar softmax_cross_entropy(const Matrix<Scalar>& logits, const Matrix<Scalar>& targets,
                             Matrix<Scalar>* grad = nullptr) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    fail(ErrorKind::validation, "cross entropy: logits and targets shapes differ");
  }
  const Index rows = logits.rows();
  Matrix<Scalar> probs = logits;
  Scalar loss = 0;
  for (Index r = 0; r < rows; ++r) {
    auto row = probs.row(r);
    const Scalar m = row.maxCoeff();
    const Scalar log_sum = m + std::log((row.array() - m).exp().sum());
    loss -= (targets.row(r).array() * (logits.row(r).array() - log_sum)).sum();
    row = (logits.row(r).array() - log_sum).exp().matrix();
  }
  if (grad) *grad = (probs - targets) / Scalar(rows);
  return loss / Scalar(rows);
}

}  // namespace mra::nn
