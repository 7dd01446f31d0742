#pragma once

// Depth-derived structural complexity: histogram entropy (nats), Sobel
// gradient field, and the fraction of pixels whose gradient magnitude
// exceeds tau times the depth range.

#include <cstdint>
#include <string>
#include <vector>

#include "mmcm/raster.hpp"

namespace mmcm {

inline constexpr int kDefaultBins = 256;
inline constexpr double kDefaultTau = 0.1;

struct GradientField {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
  std::vector<double> magnitude;
};

struct StructuralResult {
  std::string frame_id;
  double depth_entropy = 0.0;
  double depth_mean = 0.0;
  double depth_min = 0.0;
  double depth_max = 0.0;
  double discontinuity_ratio = 0.0;
  int bin_count = kDefaultBins;
  double tau = kDefaultTau;
};

/// Shannon entropy (natural log) of an equal-width histogram over
/// [min, max]. A constant map returns exactly 0. Throws InvalidBinCount.
double depth_entropy(const DepthMap& depth, int bins = kDefaultBins);

GradientField sobel_gradients(const DepthMap& depth);

/// Throws InvalidTau for tau <= 0 (or non-finite).
double discontinuity_ratio(const DepthMap& depth, double tau = kDefaultTau);

StructuralResult structural_metrics(const DepthMap& depth,
                                    int bins = kDefaultBins,
                                    double tau = kDefaultTau,
                                    std::string frame_id = {});

}  // namespace mmcm
