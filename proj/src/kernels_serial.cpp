#include <algorithm>
#include <cmath>

#include "mmcm/kernels.hpp"

namespace mmcm::kernels::serial {
namespace {

double clamped(std::span<const double> d, std::uint32_t width,
               std::uint32_t height, std::int64_t x, std::int64_t y) {
  x = std::clamp<std::int64_t>(x, 0, width - 1);
  y = std::clamp<std::int64_t>(y, 0, height - 1);
  return d[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
}

void sobel_pixel(std::span<const double> d, std::uint32_t width,
                 std::uint32_t height, std::int64_t x, std::int64_t y,
                 double& gx, double& gy) {
  const auto v = [&](std::int64_t dx, std::int64_t dy) {
    return clamped(d, width, height, x + dx, y + dy);
  };
  gx = (v(1, -1) - v(-1, -1)) + 2.0 * (v(1, 0) - v(-1, 0)) + (v(1, 1) - v(-1, 1));
  gy = (v(-1, 1) + 2.0 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2.0 * v(0, -1) + v(1, -1));
}

}  // namespace

double weighted_agreement_sum(std::span<const std::uint16_t> labels_a,
                              std::span<const std::uint16_t> labels_b,
                              std::span<const double> conf_a,
                              std::span<const double> conf_b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    if (labels_a[i] == labels_b[i]) acc += std::sqrt(conf_a[i] * conf_b[i]);
  }
  return acc;
}

double sum(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

Extent extent(std::span<const double> values) {
  Extent out;
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.min = *lo;
  out.max = *hi;
  out.sum = sum(values);
  return out;
}

void histogram(std::span<const double> values, double min, double range,
               std::span<std::uint64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  if (counts.empty()) return;
  if (!(range > 0.0)) {
    counts[0] = values.size();
    return;
  }
  const double bins = static_cast<double>(counts.size());
  for (double v : values) {
    const double pos = std::floor((v - min) * bins / range);
    const auto idx = pos <= 0.0 ? std::size_t{0}
                                : std::min(static_cast<std::size_t>(pos), counts.size() - 1);
    ++counts[idx];
  }
}

void sobel(std::span<const double> depth, std::uint32_t width,
           std::uint32_t height, std::span<double> gx, std::span<double> gy,
           std::span<double> magnitude) {
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      double sx = 0.0;
      double sy = 0.0;
      sobel_pixel(depth, width, height, x, y, sx, sy);
      const std::size_t i = std::size_t{y} * width + x;
      if (!gx.empty()) gx[i] = sx;
      if (!gy.empty()) gy[i] = sy;
      if (!magnitude.empty()) magnitude[i] = std::sqrt(sx * sx + sy * sy);
    }
  }
}

std::uint64_t count_gradient_above(std::span<const double> depth,
                                   std::uint32_t width, std::uint32_t height,
                                   double threshold) {
  std::uint64_t count = 0;
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      double sx = 0.0;
      double sy = 0.0;
      sobel_pixel(depth, width, height, x, y, sx, sy);
      if (std::sqrt(sx * sx + sy * sy) > threshold) ++count;
    }
  }
  return count;
}

}  // namespace mmcm::kernels::serial
