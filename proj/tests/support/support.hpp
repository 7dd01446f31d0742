#pragma once

// Shared test fixtures: seeded random rasters and frames, temp directories.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mmcm/consensus.hpp"
#include "mmcm/raster.hpp"

namespace testing_support {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "mmcm") {
    std::random_device rd;
    for (int attempt = 0; attempt < 100; ++attempt) {
      path_ = fs::temp_directory_path() /
              (tag + "-" + std::to_string(rd()) + std::to_string(attempt));
      if (fs::create_directory(path_)) return;
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

  mmcm::LabelMap labels(std::uint32_t w, std::uint32_t h, int classes) {
    mmcm::LabelMap m{w, h, {}};
    for (std::size_t i = 0; i < m.pixel_count(); ++i) {
      m.labels.push_back(static_cast<std::uint16_t>(integer(0, classes - 1)));
    }
    return m;
  }

  mmcm::ConfidenceMap confidence(std::uint32_t w, std::uint32_t h) {
    mmcm::ConfidenceMap m{w, h, {}, mmcm::Dtype::kScalarF64};
    for (std::size_t i = 0; i < m.pixel_count(); ++i) m.values.push_back(real(0.0, 1.0));
    return m;
  }

  // Random frame: labels are correlated with a shared base map so that
  // pairs agree on a random fraction of pixels.
  mmcm::EnsembleFrame frame(int max_side = 16, int max_models = 4, int max_classes = 19) {
    const auto w = static_cast<std::uint32_t>(integer(1, max_side));
    const auto h = static_cast<std::uint32_t>(integer(1, max_side));
    const int n = integer(2, max_models);
    const int k = integer(1, max_classes);
    const auto base = labels(w, h, k);
    mmcm::EnsembleFrame f;
    f.frame_id = "f";
    const double keep = real(0.0, 1.0);
    for (int m = 0; m < n; ++m) {
      mmcm::Prediction p{base, confidence(w, h)};
      for (auto& l : p.labels.labels) {
        if (!coin(keep)) l = static_cast<std::uint16_t>(integer(0, k - 1));
      }
      f.predictions.push_back(std::move(p));
    }
    return f;
  }

  // Random depth map; a third are small-integer valued so exact gradient
  // ties and repeated values occur.
  mmcm::DepthMap depth(int max_side = 32) {
    const auto w = static_cast<std::uint32_t>(integer(1, max_side));
    const auto h = static_cast<std::uint32_t>(integer(1, max_side));
    mmcm::DepthMap d{w, h, {}, mmcm::Dtype::kScalarF64};
    const int kind = integer(0, 2);
    const double scale = real(0.1, 200.0);
    const double offset = real(-50.0, 50.0);
    for (std::size_t i = 0; i < d.pixel_count(); ++i) {
      if (kind == 0) {
        d.values.push_back(static_cast<double>(integer(0, 6)));
      } else {
        d.values.push_back(offset + scale * real(0.0, 1.0));
      }
    }
    return d;
  }
};

inline mmcm::Prediction uniform_prediction(std::vector<std::uint16_t> labels,
                                           std::uint32_t w, std::uint32_t h,
                                           double conf) {
  return {mmcm::LabelMap{w, h, std::move(labels)},
          mmcm::ConfidenceMap{w, h, std::vector<double>(std::size_t{w} * h, conf),
                              mmcm::Dtype::kScalarF64}};
}

inline mmcm::DepthMap depth_map(std::uint32_t w, std::uint32_t h, std::vector<double> v) {
  return {w, h, std::move(v), mmcm::Dtype::kScalarF64};
}

}  // namespace testing_support
