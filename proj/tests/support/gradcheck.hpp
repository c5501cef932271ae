#pragma once

// Central finite-difference oracle. It only ever calls the loss function, so
// it stays independent of the backward passes it checks.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mra/nn/parameter.hpp"
#include "mra/random.hpp"

namespace mra::test {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
};

inline double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  const double denom = std::max({analytic.norm(), numeric.norm(), 1e-8});
  return (analytic - numeric).norm() / denom;
}

/// `loss(bool accumulate)` evaluates the loss and, when asked, accumulates
/// analytic gradients into the parameters.
template <typename LossFn>
GradCheckResult check_parameter_gradients(const nn::ParameterList<double>& params, LossFn&& loss,
                                          double step = 1e-5) {
  nn::zero_grads(params);
  loss(true);
  std::vector<Eigen::MatrixXd> analytic;
  for (auto* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto* p = params[i];
    Eigen::MatrixXd numeric(p->value.rows(), p->value.cols());
    for (Eigen::Index k = 0; k < p->value.size(); ++k) {
      const double original = p->value.data()[k];
      p->value.data()[k] = original + step;
      const double plus = loss(false);
      p->value.data()[k] = original - step;
      const double minus = loss(false);
      p->value.data()[k] = original;
      numeric.data()[k] = (plus - minus) / (2.0 * step);
    }
    const double err = relative_error(analytic[i], numeric);
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_parameter = p->name;
    }
  }
  return result;
}

/// Same oracle for the gradient with respect to an input matrix.
template <typename LossFn>
double check_input_gradient(Eigen::MatrixXd& input, const Eigen::MatrixXd& analytic, LossFn&& loss,
                            double step = 1e-5) {
  Eigen::MatrixXd numeric(input.rows(), input.cols());
  for (Eigen::Index k = 0; k < input.size(); ++k) {
    const double original = input.data()[k];
    input.data()[k] = original + step;
    const double plus = loss();
    input.data()[k] = original - step;
    const double minus = loss();
    input.data()[k] = original;
    numeric.data()[k] = (plus - minus) / (2.0 * step);
  }
  return relative_error(analytic, numeric);
}

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  return m;
}

}  // namespace mra::test
