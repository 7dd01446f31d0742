#pragma once

// Raster value types shared by every metric, and the MMC1 container.
//
// MMC1 layout (all integers little-endian):
//   bytes 0-3   magic "MMC1"
//   byte  4     dtype: 0x01 u16 labels, 0x02 f32 scalar, 0x03 f64 scalar
//   bytes 5-7   reserved, written as zero
//   bytes 8-11  width  (u32)
//   bytes 12-15 height (u32)
//   payload     width*height elements, row-major, top-left origin
//
// Scalar rasters are held as double in memory; `storage` records which
// scalar dtype they are written with. Anything read from an f32 file
// round-trips bit-exactly through f32 storage.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace mmcm {

enum class Dtype : std::uint8_t {
  kLabelU16 = 0x01,
  kScalarF32 = 0x02,
  kScalarF64 = 0x03,
};

inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::array<char, 4> kMagic{'M', 'M', 'C', '1'};

std::size_t element_size(Dtype dtype);

struct RasterHeader {
  Dtype dtype = Dtype::kLabelU16;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

struct LabelMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint16_t> labels;

  std::size_t pixel_count() const {
    return std::size_t{width} * std::size_t{height};
  }
  std::uint16_t at(std::uint32_t x, std::uint32_t y) const {
    return labels[std::size_t{y} * width + x];
  }
  void validate() const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// Per-pixel confidence of the predicted class; every value finite, in [0,1].
struct ConfidenceMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;
  Dtype storage = Dtype::kScalarF32;

  std::size_t pixel_count() const {
    return std::size_t{width} * std::size_t{height};
  }
  double at(std::uint32_t x, std::uint32_t y) const {
    return values[std::size_t{y} * width + x];
  }
  void validate() const;

  friend bool operator==(const ConfidenceMap&, const ConfidenceMap&) = default;
};

/// Per-pixel depth in arbitrary consistent units; every value finite.
struct DepthMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;
  Dtype storage = Dtype::kScalarF32;

  std::size_t pixel_count() const {
    return std::size_t{width} * std::size_t{height};
  }
  double at(std::uint32_t x, std::uint32_t y) const {
    return values[std::size_t{y} * width + x];
  }
  void validate() const;

  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

using Raster = std::variant<LabelMap, ConfidenceMap, DepthMap>;

/// How a scalar payload is interpreted; selects the value checks applied.
enum class RasterRole { kLabels, kConfidence, kDepth };

RasterHeader parse_header(std::span<const std::byte> bytes);
RasterHeader read_header(const std::filesystem::path& path);

std::vector<std::byte> encode(const LabelMap& map);
std::vector<std::byte> encode(const ConfidenceMap& map);
std::vector<std::byte> encode(const DepthMap& map);

/// Decodes a complete MMC1 image. Trailing bytes are an error.
Raster decode(std::span<const std::byte> bytes, RasterRole role);

/// u16 payloads decode as LabelMap, scalar payloads as DepthMap.
Raster read_raster(const std::filesystem::path& path);
Raster read_raster(const std::filesystem::path& path, RasterRole role);

LabelMap read_labels(const std::filesystem::path& path);
ConfidenceMap read_confidence(const std::filesystem::path& path);
DepthMap read_depth(const std::filesystem::path& path);

// As above, decoding into `out` and reusing its storage. On error `out` is
// left in an unspecified but valid state.
void read_into(const std::filesystem::path& path, LabelMap& out);
void read_into(const std::filesystem::path& path, ConfidenceMap& out);
void read_into(const std::filesystem::path& path, DepthMap& out);

void write_raster(const LabelMap& map, const std::filesystem::path& path);
void write_raster(const ConfidenceMap& map, const std::filesystem::path& path);
void write_raster(const DepthMap& map, const std::filesystem::path& path);
void write_raster(const Raster& raster, const std::filesystem::path& path);

/// Smallest scalar dtype that stores every value without loss.
Dtype narrowest_exact_storage(std::span<const double> values);

}  // namespace mmcm
