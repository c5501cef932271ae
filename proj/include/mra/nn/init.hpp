#pragma once

#include <cmath>
#include <random>

#include "mra/random.hpp"
#include "mra/tensor.hpp"

namespace mra::nn {

// Normal(0, stddev) resampled until it falls inside +-2 stddev.
template <typename Scalar>
void fill_truncated_normal(Matrix<Scalar>& m, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Index i = 0; i < m.size(); ++i) {
    double v = dist(rng);
    while (std::abs(v) > 2.0 * stddev) v = dist(rng);
    m.data()[i] = static_cast<Scalar>(v);
  }
}

template <typename Scalar>
void fill_normal(Matrix<Scalar>& m, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
}

// U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); fan_in is the row count.
template <typename Scalar>
void fill_xavier_uniform(Matrix<Scalar>& m, Rng& rng) {
  const double a = std::sqrt(6.0 / double(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-a, a);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
}

enum class LinearInit { truncated_normal, xavier_uniform };

}  // namespace mra::nn
