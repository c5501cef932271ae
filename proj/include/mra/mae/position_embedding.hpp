#pragma once

#include "mra/tensor.hpp"

namespace mra::mae {

/// Fixed 2-D sine-cosine table, one row per patch in row-major grid order.
/// The first half of each row encodes the column coordinate, the second
/// half the row coordinate; dim must be divisible by 4.
Matrix<double> sincos_position_embedding(int dim, int grid_h, int grid_w);

}  // namespace mra::mae
