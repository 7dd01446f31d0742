#pragma once

// OpenMP pixel kernels behind the consensus and structural metrics.
//
// Floating-point reductions split the input into fixed blocks of
// kReductionBlock elements, reduce each block into four interleaved lane
// accumulators (element i goes to lane i mod 4) and then add the block
// partials in block order. The grouping depends only on the input length,
// so results are bit-identical for any thread count.
//
// mmcm::kernels::serial holds plain single-loop versions of the same
// operations, used as a baseline by tests and the benchmark.

#include <cstddef>
#include <cstdint>
#include <span>

namespace mmcm::kernels {

inline constexpr std::size_t kReductionBlock = std::size_t{1} << 14;

/// Σ δ(a_i, b_i) · √(ca_i · cb_i) over all pixels.
double weighted_agreement_sum(std::span<const std::uint16_t> labels_a,
                              std::span<const std::uint16_t> labels_b,
                              std::span<const double> conf_a,
                              std::span<const double> conf_b);

double sum(std::span<const double> values);

struct Extent {
  double min = 0.0;
  double max = 0.0;
  double sum = 0.0;
};

Extent extent(std::span<const double> values);

/// Equal-width histogram over [min, min + range]; bin = floor((v-min)*B/range)
/// clamped to B-1. A zero range puts everything in bin 0.
void histogram(std::span<const double> values, double min, double range,
               std::span<std::uint64_t> counts);

/// Sobel responses with replicate borders. Any output span may be empty to
/// skip it; non-empty spans must hold width*height elements.
void sobel(std::span<const double> depth, std::uint32_t width,
           std::uint32_t height, std::span<double> gx, std::span<double> gy,
           std::span<double> magnitude);

/// Number of pixels whose Sobel magnitude is strictly above `threshold`,
/// without materializing the gradient field.
std::uint64_t count_gradient_above(std::span<const double> depth,
                                   std::uint32_t width, std::uint32_t height,
                                   double threshold);

namespace serial {

double weighted_agreement_sum(std::span<const std::uint16_t> labels_a,
                              std::span<const std::uint16_t> labels_b,
                              std::span<const double> conf_a,
                              std::span<const double> conf_b);
double sum(std::span<const double> values);
Extent extent(std::span<const double> values);
void histogram(std::span<const double> values, double min, double range,
               std::span<std::uint64_t> counts);
void sobel(std::span<const double> depth, std::uint32_t width,
           std::uint32_t height, std::span<double> gx, std::span<double> gy,
           std::span<double> magnitude);
std::uint64_t count_gradient_above(std::span<const double> depth,
                                   std::uint32_t width, std::uint32_t height,
                                   double threshold);

}  // namespace serial
}  // namespace mmcm::kernels
