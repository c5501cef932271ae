#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mra/image.hpp"

namespace mra::io {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  int width = 480;
  int height = 320;
  std::optional<double> y_min;
  std::optional<double> y_max;
};

/// RGB color of series i in render_line_plot.
std::array<float, 3> series_color(std::size_t index);

/// Rasterized line chart on a white canvas: axes, one polyline with point
/// markers per series. Non-finite points are skipped.
Image render_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& options = {});

}  // namespace mra::io
