#include "mra/io/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mra::io {

namespace {

constexpr int kMargin = 24;

struct Canvas {
  Image image;

  void put(int x, int y, const std::array<float, 3>& color) {
    if (x < 0 || y < 0 || x >= image.width() || y >= image.height()) return;
    for (int c = 0; c < 3; ++c) image(y, x, c) = color[static_cast<std::size_t>(c)];
  }

  void dot(int x, int y, int radius, const std::array<float, 3>& color) {
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx) put(x + dx, y + dy, color);
  }

  void line(int x0, int y0, int x1, int y1, const std::array<float, 3>& color) {
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      dot(x0, y0, 1, color);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }
};

}  // namespace

std::array<float, 3> series_color(std::size_t index) {
  static constexpr std::array<std::array<float, 3>, 8> kPalette = {{
      {0.12f, 0.47f, 0.71f},
      {1.00f, 0.50f, 0.05f},
      {0.17f, 0.63f, 0.17f},
      {0.84f, 0.15f, 0.16f},
      {0.58f, 0.40f, 0.74f},
      {0.55f, 0.34f, 0.29f},
      {0.89f, 0.47f, 0.76f},
      {0.50f, 0.50f, 0.50f},
  }};
  return kPalette[index % kPalette.size()];
}

Image render_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& options) {
  Canvas canvas{Image(options.height, options.width, 3, 1.0f)};
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (options.y_min) y_lo = *options.y_min;
  if (options.y_max) y_hi = *options.y_max;
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;

  const int left = kMargin;
  const int right = options.width - kMargin;
  const int top = kMargin;
  const int bottom = options.height - kMargin;
  const std::array<float, 3> axis = {0.0f, 0.0f, 0.0f};
  const std::array<float, 3> grid = {0.88f, 0.88f, 0.88f};
  for (int k = 1; k < 4; ++k) {
    const int gy = top + (bottom - top) * k / 4;
    for (int x = left; x <= right; ++x) canvas.put(x, gy, grid);
  }
  for (int x = left; x <= right; ++x) canvas.put(x, bottom, axis);
  for (int y = top; y <= bottom; ++y) canvas.put(left, y, axis);

  auto px = [&](double x) {
    return left + static_cast<int>(std::lround((x - x_lo) / (x_hi - x_lo) * (right - left)));
  };
  auto py = [&](double y) {
    const double t = std::clamp((y - y_lo) / (y_hi - y_lo), 0.0, 1.0);
    return bottom - static_cast<int>(std::lround(t * (bottom - top)));
  };
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto color = series_color(s);
    bool have_prev = false;
    int prev_x = 0;
    int prev_y = 0;
    const auto& ser = series[s];
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) {
        have_prev = false;
        continue;
      }
      const int cx = px(ser.x[i]);
      const int cy = py(ser.y[i]);
      if (have_prev) canvas.line(prev_x, prev_y, cx, cy, color);
      canvas.dot(cx, cy, 2, color);
      prev_x = cx;
      prev_y = cy;
      have_prev = true;
    }
  }
  return canvas.image;
}

}  // namespace mra::io
