#include "mra/mae/position_embedding.hpp"

#include <cmath>

#include "mra/error.hpp"

namespace mra::mae {

namespace {

void fill_1d(Eigen::Ref<Matrix<double>> out, int position) {
  const Index quarter = out.cols() / 2;
  for (Index i = 0; i < quarter; ++i) {
    const double omega = 1.0 / std::pow(10000.0, double(i) / double(quarter));
    out(0, i) = std::sin(position * omega);
    out(0, quarter + i) = std::cos(position * omega);
  }
}

}  // namespace

Matrix<double> sincos_position_embedding(int dim, int grid_h, int grid_w) {
  if (dim % 4 != 0) fail(ErrorKind::validation, "position embedding dim must be divisible by 4");
  Matrix<double> table(Index(grid_h) * grid_w, dim);
  const int half = dim / 2;
  for (int y = 0; y < grid_h; ++y) {
    for (int x = 0; x < grid_w; ++x) {
      const Index row = Index(y) * grid_w + x;
      fill_1d(table.block(row, 0, 1, half), x);
      fill_1d(table.block(row, half, 1, half), y);
    }
  }
  return table;
}

}  // namespace mra::mae
