#pragma once

// Static SVG 1.1 rendering for gap heatmaps and metric-vs-consensus
// scatter plots. Output is a pure function of the inputs.
//
// Heatmap colormap: five stops, linearly interpolated in sRGB, luminance
// increasing monotonically:
//   t = 0.00  #440154   t = 0.25  #3b528b   t = 0.50  #21918c
//   t = 0.75  #5ec962   t = 1.00  #fde725
// Cells map value/max_entry onto t (t = 0 everywhere for an all-zero matrix).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmcm/gap.hpp"

namespace mmcm::svg {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

Rgb colormap(double t);
std::string hex(Rgb color);
std::string escape(std::string_view text);

std::string heatmap(const GapMatrix& matrix, std::string_view title = {});

struct Series {
  std::string tag;
  std::vector<Point2> points;
  std::optional<TrendFit> fit;  // dotted line over the series' x extent
};

std::string scatter(std::span<const Series> series, std::string_view x_label,
                    std::string_view y_label, std::string_view title = {});

}  // namespace mmcm::svg
