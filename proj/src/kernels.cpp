#include "mmcm/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace mmcm::kernels {
namespace {

std::size_t block_count(std::size_t n) {
  return (n + kReductionBlock - 1) / kReductionBlock;
}

// Applies `block_fn(begin, end)` to each fixed block in parallel and adds the
// partials serially in block order.
template <class BlockFn>
double blocked_sum(std::size_t n, BlockFn block_fn) {
  const std::size_t blocks = block_count(n);
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t end = std::min(n, begin + kReductionBlock);
    partial[static_cast<std::size_t>(b)] = block_fn(begin, end);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// Four interleaved accumulators, combined in a fixed order.
template <class Term>
double lane_sum(std::size_t begin, std::size_t end, Term term) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    a0 += term(i);
    a1 += term(i + 1);
    a2 += term(i + 2);
    a3 += term(i + 3);
  }
  for (; i < end; ++i) a0 += term(i);
  return (a0 + a1) + (a2 + a3);
}

struct Rows {
  const double* above;
  const double* here;
  const double* below;
};

inline Rows rows_at(const double* d, std::uint32_t width, std::uint32_t height,
                    std::uint32_t y) {
  const std::uint32_t ym = y == 0 ? 0 : y - 1;
  const std::uint32_t yp = y + 1 < height ? y + 1 : height - 1;
  return {d + std::size_t{ym} * width, d + std::size_t{y} * width,
          d + std::size_t{yp} * width};
}

// Correlation with the kernels as written:
//   Sx = [-1 0 1; -2 0 2; -1 0 1],  Sy = [-1 -2 -1; 0 0 0; 1 2 1].
inline void sobel_at(const Rows& r, std::uint32_t width, std::uint32_t x,
                     double& gx, double& gy) {
  const std::uint32_t xm = x == 0 ? 0 : x - 1;
  const std::uint32_t xp = x + 1 < width ? x + 1 : width - 1;
  gx = (r.above[xp] - r.above[xm]) + 2.0 * (r.here[xp] - r.here[xm]) +
       (r.below[xp] - r.below[xm]);
  gy = (r.below[xm] + 2.0 * r.below[x] + r.below[xp]) -
       (r.above[xm] + 2.0 * r.above[x] + r.above[xp]);
}

}  // namespace

double weighted_agreement_sum(std::span<const std::uint16_t> labels_a,
                              std::span<const std::uint16_t> labels_b,
                              std::span<const double> conf_a,
                              std::span<const double> conf_b) {
  const std::uint16_t* la = labels_a.data();
  const std::uint16_t* lb = labels_b.data();
  const double* ca = conf_a.data();
  const double* cb = conf_b.data();
  return blocked_sum(labels_a.size(), [=](std::size_t begin, std::size_t end) {
    constexpr std::size_t kChunk = 256;
    double w[kChunk];
    double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
    for (std::size_t c = begin; c < end; c += kChunk) {
      const std::size_t m = std::min(kChunk, end - c);
      for (std::size_t k = 0; k < m; ++k) w[k] = std::sqrt(ca[c + k] * cb[c + k]);
      for (std::size_t k = 0; k < m; ++k) w[k] = la[c + k] == lb[c + k] ? w[k] : 0.0;
      std::size_t k = 0;
      for (; k + 4 <= m; k += 4) {
        l0 += w[k];
        l1 += w[k + 1];
        l2 += w[k + 2];
        l3 += w[k + 3];
      }
      for (; k < m; ++k) l0 += w[k];
    }
    return (l0 + l1) + (l2 + l3);
  });
}

double sum(std::span<const double> values) {
  const double* v = values.data();
  return blocked_sum(values.size(), [=](std::size_t begin, std::size_t end) {
    return lane_sum(begin, end, [=](std::size_t i) { return v[i]; });
  });
}

Extent extent(std::span<const double> values) {
  Extent out;
  if (values.empty()) return out;
  const double* v = values.data();
  double lo = v[0];
  double hi = v[0];
#pragma omp parallel for reduction(min : lo) reduction(max : hi) \
    if (values.size() > kReductionBlock)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(values.size());
       ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  out.min = lo;
  out.max = hi;
  out.sum = sum(values);
  return out;
}

void histogram(std::span<const double> values, double min, double range,
               std::span<std::uint64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  const std::size_t bins = counts.size();
  if (bins == 0) return;
  if (!(range > 0.0)) {
    counts[0] = values.size();
    return;
  }
  const double scale = static_cast<double>(bins);
  const auto last = bins - 1;
  const double* v = values.data();
  const auto last_pos = static_cast<double>(last);
  constexpr std::size_t kChunk = 512;
  const auto chunks =
      static_cast<std::ptrdiff_t>((values.size() + kChunk - 1) / kChunk);
#pragma omp parallel if (values.size() > kReductionBlock)
  {
    std::vector<std::uint64_t> local(bins, 0);
    std::uint32_t idx[kChunk];
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
      const std::size_t m = std::min(kChunk, values.size() - begin);
      const double* src = v + begin;
#pragma omp simd
      for (std::size_t k = 0; k < m; ++k) {
        // Non-negative after the clamp, so truncation is floor.
        const double pos = (src[k] - min) * scale / range;
        idx[k] = static_cast<std::uint32_t>(std::clamp(pos, 0.0, last_pos));
      }
      for (std::size_t k = 0; k < m; ++k) ++local[idx[k]];
    }
    // Integer merge: order does not matter.
#pragma omp critical(mmcm_histogram_merge)
    for (std::size_t b = 0; b < bins; ++b) counts[b] += local[b];
  }
}

void sobel(std::span<const double> depth, std::uint32_t width,
           std::uint32_t height, std::span<double> gx, std::span<double> gy,
           std::span<double> magnitude) {
  const double* d = depth.data();
  double* out_x = gx.empty() ? nullptr : gx.data();
  double* out_y = gy.empty() ? nullptr : gy.data();
  double* out_m = magnitude.empty() ? nullptr : magnitude.data();
#pragma omp parallel for schedule(static) \
    if (depth.size() > kReductionBlock)
  for (std::ptrdiff_t yy = 0; yy < static_cast<std::ptrdiff_t>(height); ++yy) {
    const auto y = static_cast<std::uint32_t>(yy);
    const Rows r = rows_at(d, width, height, y);
    const std::size_t row = std::size_t{y} * width;
    for (std::uint32_t x = 0; x < width; ++x) {
      double sx = 0.0;
      double sy = 0.0;
      sobel_at(r, width, x, sx, sy);
      if (out_x) out_x[row + x] = sx;
      if (out_y) out_y[row + x] = sy;
      if (out_m) out_m[row + x] = std::sqrt(sx * sx + sy * sy);
    }
  }
}

std::uint64_t count_gradient_above(std::span<const double> depth,
                                   std::uint32_t width, std::uint32_t height,
                                   double threshold) {
  const double* d = depth.data();
  std::uint64_t count = 0;
#pragma omp parallel for schedule(static) reduction(+ : count) \
    if (depth.size() > kReductionBlock)
  for (std::ptrdiff_t yy = 0; yy < static_cast<std::ptrdiff_t>(height); ++yy) {
    const auto y = static_cast<std::uint32_t>(yy);
    const Rows r = rows_at(d, width, height, y);
    const auto above = [&](std::uint32_t x) {
      double sx = 0.0;
      double sy = 0.0;
      sobel_at(r, width, x, sx, sy);
      return std::sqrt(sx * sx + sy * sy) > threshold ? 1u : 0u;
    };
    count += above(0);
    if (width > 1) count += above(width - 1);
    std::uint64_t inner = 0;
    const double* a = r.above;
    const double* h = r.here;
    const double* b = r.below;
#pragma omp simd reduction(+ : inner)
    for (std::uint32_t x = 1; x < width - 1; ++x) {
      const double sx = (a[x + 1] - a[x - 1]) + 2.0 * (h[x + 1] - h[x - 1]) +
                        (b[x + 1] - b[x - 1]);
      const double sy = (b[x - 1] + 2.0 * b[x] + b[x + 1]) -
                        (a[x - 1] + 2.0 * a[x] + a[x + 1]);
      inner += std::sqrt(sx * sx + sy * sy) > threshold ? 1u : 0u;
    }
    count += inner;
  }
  return count;
}

}  // namespace mmcm::kernels
