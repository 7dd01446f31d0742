#include "mmcm/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "mmcm/error.hpp"

namespace mmcm {
namespace {

constexpr bool kHostLittle = std::endian::native == std::endian::little;

template <class U>
void store_le(std::byte* out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out[i] = static_cast<std::byte>((value >> (8 * i)) & 0xFFu);
  }
}

template <class U>
U load_le(const std::byte* in) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(std::to_integer<unsigned>(in[i])) << (8 * i);
  }
  return value;
}

void check_dims(std::uint32_t width, std::uint32_t height, std::size_t size,
                const char* what) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + " must be at least 1x1");
  }
  if (size != std::size_t{width} * height) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + " holds " + std::to_string(size) +
             " values for " + std::to_string(width) + "x" +
             std::to_string(height));
  }
}

// Branch-free scan; v - v is 0 for finite v and NaN otherwise.
bool all_finite(std::span<const double> values) {
  const double* v = values.data();
  const std::size_t n = values.size();
  std::size_t bad = 0;
#pragma omp simd reduction(+ : bad)
  for (std::size_t i = 0; i < n; ++i) bad += (v[i] - v[i] == 0.0) ? 0 : 1;
  return bad == 0;
}

bool all_unit(std::span<const double> values) {
  const double* v = values.data();
  const std::size_t n = values.size();
  std::size_t bad = 0;
#pragma omp simd reduction(+ : bad)
  for (std::size_t i = 0; i < n; ++i) bad += (v[i] >= 0.0 && v[i] <= 1.0) ? 0 : 1;
  return bad == 0;
}

void check_finite(std::span<const double> values, const char* what) {
  if (all_finite(values)) return;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorCode::NonFiniteValue,
           std::string(what) + " value at index " + std::to_string(i) +
               " is not finite");
    }
  }
}

void check_scalar_storage(Dtype storage) {
  if (storage != Dtype::kScalarF32 && storage != Dtype::kScalarF64) {
    fail(ErrorCode::UnknownDtype, "scalar raster storage must be f32 or f64");
  }
}

std::vector<std::byte> make_image(Dtype dtype, std::uint32_t width,
                                  std::uint32_t height) {
  std::vector<std::byte> out(kHeaderSize +
                             std::size_t{width} * height * element_size(dtype));
  std::memcpy(out.data(), kMagic.data(), kMagic.size());
  out[4] = static_cast<std::byte>(dtype);
  store_le<std::uint32_t>(out.data() + 8, width);
  store_le<std::uint32_t>(out.data() + 12, height);
  return out;
}

std::vector<std::byte> encode_scalar(std::uint32_t width, std::uint32_t height,
                                     std::span<const double> values,
                                     Dtype storage) {
  auto out = make_image(storage, width, height);
  std::byte* dst = out.data() + kHeaderSize;
  if (storage == Dtype::kScalarF32) {
    for (double v : values) {
      const auto narrow = static_cast<float>(v);
      if (!std::isfinite(narrow)) {
        fail(ErrorCode::NonFiniteValue,
             "value " + std::to_string(v) + " overflows f32 storage");
      }
      store_le<std::uint32_t>(dst, std::bit_cast<std::uint32_t>(narrow));
      dst += 4;
    }
  } else {
    for (double v : values) {
      store_le<std::uint64_t>(dst, std::bit_cast<std::uint64_t>(v));
      dst += 8;
    }
  }
  return out;
}

// Appends through a small aligned buffer so the result is never zero-filled.
template <class Stored, class Out>
void decode_le(const std::byte* src, std::size_t count, std::vector<Out>& values) {
  values.clear();
  values.reserve(count);
  constexpr std::size_t kChunk = 1024;
  Stored buf[kChunk];
  for (std::size_t i = 0; i < count; i += kChunk) {
    const std::size_t m = std::min(kChunk, count - i);
    const std::byte* at = src + sizeof(Stored) * i;
    if constexpr (kHostLittle) {
      std::memcpy(buf, at, sizeof(Stored) * m);
    } else {
      using U = std::conditional_t<sizeof(Stored) == 2, std::uint16_t,
                                   std::conditional_t<sizeof(Stored) == 4,
                                                      std::uint32_t, std::uint64_t>>;
      for (std::size_t k = 0; k < m; ++k) {
        buf[k] = std::bit_cast<Stored>(load_le<U>(at + sizeof(Stored) * k));
      }
    }
    values.insert(values.end(), buf, buf + m);
  }
}

void decode_scalar(const std::byte* src, std::size_t count, Dtype dtype,
                   std::vector<double>& values) {
  if (dtype == Dtype::kScalarF32) {
    decode_le<float>(src, count, values);
  } else {
    decode_le<double>(src, count, values);
  }
}

// Reads into `bytes`, reusing its capacity.
void slurp_into(const std::filesystem::path& path, std::vector<std::byte>& bytes) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    fail(ErrorCode::IoFailure, "cannot open " + path.string());
  }
  const auto size = static_cast<std::size_t>(in.tellg());
  bytes.resize(size);
  in.seekg(0);
  if (size > 0 &&
      !in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(size))) {
    fail(ErrorCode::IoFailure, "short read on " + path.string());
  }
}

std::span<const std::byte> slurp(const std::filesystem::path& path) {
  thread_local std::vector<std::byte> scratch;
  slurp_into(path, scratch);
  return scratch;
}

void spill(const std::vector<std::byte>& bytes,
           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot create " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    fail(ErrorCode::IoFailure, "write failed on " + path.string());
  }
}

}  // namespace

std::size_t element_size(Dtype dtype) {
  switch (dtype) {
    case Dtype::kLabelU16: return 2;
    case Dtype::kScalarF32: return 4;
    case Dtype::kScalarF64: return 8;
  }
  fail(ErrorCode::UnknownDtype, "no element size for dtype");
}

void LabelMap::validate() const { check_dims(width, height, labels.size(), "label map"); }

void ConfidenceMap::validate() const {
  check_dims(width, height, values.size(), "confidence map");
  check_scalar_storage(storage);
  if (all_unit(values)) return;
  check_finite(values, "confidence");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0 || values[i] > 1.0) {
      fail(ErrorCode::OutOfRangeConfidence,
           "confidence value " + std::to_string(values[i]) + " at index " +
               std::to_string(i) + " outside [0,1]");
    }
  }
}

void DepthMap::validate() const {
  check_dims(width, height, values.size(), "depth map");
  check_scalar_storage(storage);
  check_finite(values, "depth");
}

RasterHeader parse_header(std::span<const std::byte> bytes) {
  if (bytes.size() >= kMagic.size() &&
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorCode::BadMagic, "missing MMC1 magic");
  }
  if (bytes.size() < kHeaderSize) {
    fail(ErrorCode::TruncatedPayload,
         "header needs 16 bytes, got " + std::to_string(bytes.size()));
  }
  const auto code = std::to_integer<std::uint8_t>(bytes[4]);
  if (code < 0x01 || code > 0x03) {
    fail(ErrorCode::UnknownDtype, "dtype code " + std::to_string(code));
  }
  RasterHeader header;
  header.dtype = static_cast<Dtype>(code);
  header.width = load_le<std::uint32_t>(bytes.data() + 8);
  header.height = load_le<std::uint32_t>(bytes.data() + 12);
  if (header.width < 1 || header.height < 1) {
    fail(ErrorCode::DimensionMismatch, "zero-sized raster in header");
  }
  return header;
}

RasterHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::IoFailure, "cannot open " + path.string());
  }
  std::array<std::byte, kHeaderSize> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  return parse_header(std::span(buf.data(), static_cast<std::size_t>(in.gcount())));
}

std::vector<std::byte> encode(const LabelMap& map) {
  map.validate();
  auto out = make_image(Dtype::kLabelU16, map.width, map.height);
  std::byte* dst = out.data() + kHeaderSize;
  if constexpr (kHostLittle) {
    std::memcpy(dst, map.labels.data(), map.labels.size() * 2);
  } else {
    for (auto label : map.labels) {
      store_le<std::uint16_t>(dst, label);
      dst += 2;
    }
  }
  return out;
}

std::vector<std::byte> encode(const ConfidenceMap& map) {
  map.validate();
  return encode_scalar(map.width, map.height, map.values, map.storage);
}

std::vector<std::byte> encode(const DepthMap& map) {
  map.validate();
  return encode_scalar(map.width, map.height, map.values, map.storage);
}

namespace {

struct Payload {
  RasterHeader header;
  const std::byte* data;
  std::size_t pixels;
};

// Every structural check short of the per-value ones.
Payload checked_payload(std::span<const std::byte> bytes, RasterRole role) {
  const RasterHeader header = parse_header(bytes);
  const std::size_t elem = element_size(header.dtype);
  const std::uint64_t pixels = std::uint64_t{header.width} * header.height;
  const std::size_t payload = bytes.size() - kHeaderSize;
  if (pixels > std::numeric_limits<std::uint64_t>::max() / elem ||
      payload < pixels * elem) {
    fail(ErrorCode::TruncatedPayload,
         "payload has " + std::to_string(payload) + " bytes, header needs " +
             std::to_string(pixels * elem));
  }
  if (payload > pixels * elem) {
    fail(ErrorCode::OversizedPayload,
         std::to_string(payload - pixels * elem) + " trailing bytes");
  }
  const bool is_label = header.dtype == Dtype::kLabelU16;
  if (is_label != (role == RasterRole::kLabels)) {
    fail(ErrorCode::DtypeMismatch,
         is_label ? "u16 label payload where a scalar raster was expected"
                  : "scalar payload where a label raster was expected");
  }
  return {header, bytes.data() + kHeaderSize, static_cast<std::size_t>(pixels)};
}

void decode_into(std::span<const std::byte> bytes, LabelMap& out) {
  const Payload p = checked_payload(bytes, RasterRole::kLabels);
  out.width = p.header.width;
  out.height = p.header.height;
  decode_le<std::uint16_t>(p.data, p.pixels, out.labels);
}

template <class Map>
void decode_scalar_into(std::span<const std::byte> bytes, RasterRole role,
                        Map& out) {
  const Payload p = checked_payload(bytes, role);
  out.width = p.header.width;
  out.height = p.header.height;
  out.storage = p.header.dtype;
  decode_scalar(p.data, p.pixels, p.header.dtype, out.values);
  out.validate();
}

}  // namespace

Raster decode(std::span<const std::byte> bytes, RasterRole role) {
  switch (role) {
    case RasterRole::kLabels: {
      LabelMap map;
      decode_into(bytes, map);
      return map;
    }
    case RasterRole::kConfidence: {
      ConfidenceMap map;
      decode_scalar_into(bytes, role, map);
      return map;
    }
    case RasterRole::kDepth: break;
  }
  DepthMap map;
  decode_scalar_into(bytes, RasterRole::kDepth, map);
  return map;
}

Raster read_raster(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const auto header = parse_header(bytes);
  return decode(bytes, header.dtype == Dtype::kLabelU16 ? RasterRole::kLabels
                                                        : RasterRole::kDepth);
}

Raster read_raster(const std::filesystem::path& path, RasterRole role) {
  return decode(slurp(path), role);
}

LabelMap read_labels(const std::filesystem::path& path) {
  return std::get<LabelMap>(read_raster(path, RasterRole::kLabels));
}

ConfidenceMap read_confidence(const std::filesystem::path& path) {
  return std::get<ConfidenceMap>(read_raster(path, RasterRole::kConfidence));
}

DepthMap read_depth(const std::filesystem::path& path) {
  return std::get<DepthMap>(read_raster(path, RasterRole::kDepth));
}

void read_into(const std::filesystem::path& path, LabelMap& out) {
  decode_into(slurp(path), out);
}

void read_into(const std::filesystem::path& path, ConfidenceMap& out) {
  decode_scalar_into(slurp(path), RasterRole::kConfidence, out);
}

void read_into(const std::filesystem::path& path, DepthMap& out) {
  decode_scalar_into(slurp(path), RasterRole::kDepth, out);
}

void write_raster(const LabelMap& map, const std::filesystem::path& path) {
  spill(encode(map), path);
}

void write_raster(const ConfidenceMap& map, const std::filesystem::path& path) {
  spill(encode(map), path);
}

void write_raster(const DepthMap& map, const std::filesystem::path& path) {
  spill(encode(map), path);
}

void write_raster(const Raster& raster, const std::filesystem::path& path) {
  std::visit([&](const auto& map) { write_raster(map, path); }, raster);
}

Dtype narrowest_exact_storage(std::span<const double> values) {
  const bool fits = std::all_of(values.begin(), values.end(), [](double v) {
    return static_cast<double>(static_cast<float>(v)) == v;
  });
  return fits ? Dtype::kScalarF32 : Dtype::kScalarF64;
}

}  // namespace mmcm
