#include "mmcm/structural.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mmcm/error.hpp"
#include "mmcm/kernels.hpp"

namespace mmcm {
namespace {

void check_bins(int bins) {
  if (bins < 1) {
    fail(ErrorCode::InvalidBinCount, "bins = " + std::to_string(bins));
  }
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    fail(ErrorCode::InvalidTau, "tau = " + std::to_string(tau));
  }
}

double entropy_of(const DepthMap& depth, const kernels::Extent& ext, int bins) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(bins));
  kernels::histogram(depth.values, ext.min, ext.max - ext.min, counts);
  const auto total = static_cast<double>(depth.pixel_count());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  // A single occupied bin gives -1*log(1) = -0.0; report +0.
  return h == 0.0 ? 0.0 : h;
}

double ratio_of(const DepthMap& depth, const kernels::Extent& ext, double tau) {
  const double threshold = tau * (ext.max - ext.min);
  const auto above = kernels::count_gradient_above(depth.values, depth.width,
                                                   depth.height, threshold);
  return static_cast<double>(above) / static_cast<double>(depth.pixel_count());
}

}  // namespace

double depth_entropy(const DepthMap& depth, int bins) {
  check_bins(bins);
  depth.validate();
  return entropy_of(depth, kernels::extent(depth.values), bins);
}

GradientField sobel_gradients(const DepthMap& depth) {
  depth.validate();
  const std::size_t n = depth.pixel_count();
  GradientField field{depth.width, depth.height, std::vector<double>(n),
                      std::vector<double>(n), std::vector<double>(n)};
  kernels::sobel(depth.values, depth.width, depth.height, field.gx, field.gy,
                 field.magnitude);
  return field;
}

double discontinuity_ratio(const DepthMap& depth, double tau) {
  check_tau(tau);
  depth.validate();
  return ratio_of(depth, kernels::extent(depth.values), tau);
}

StructuralResult structural_metrics(const DepthMap& depth, int bins, double tau,
                                    std::string frame_id) {
  check_bins(bins);
  check_tau(tau);
  depth.validate();
  const auto ext = kernels::extent(depth.values);

  StructuralResult r;
  r.frame_id = std::move(frame_id);
  r.depth_entropy = entropy_of(depth, ext, bins);
  r.depth_min = ext.min;
  r.depth_max = ext.max;
  // The rounded mean of a near-constant map can stray outside [min, max].
  r.depth_mean = std::clamp(ext.sum / static_cast<double>(depth.pixel_count()),
                            ext.min, ext.max);
  r.discontinuity_ratio = ratio_of(depth, ext, tau);
  r.bin_count = bins;
  r.tau = tau;
  return r;
}

}  // namespace mmcm
