#pragma once

// Synthetic ensemble corpora with analytically known scores.
//
// Every model pair agrees on exactly round(rho*|I|) pixels: the remaining
// pixels are picked by a seeded partial Fisher-Yates shuffle, and on each of
// them model i predicts (base + i) mod K, so all models differ pairwise.
// Confidence is constant per model, hence
//     mmcm = rho * mean_{i<j} sqrt(c_i c_j) * sqrt(mean_i c_i)
// which is rho * c * sqrt(c) for a single global confidence c.
//
// Randomness: std::mt19937_64 seeded with `seed` (its output sequence is
// fixed by the C++ standard; the 10000th draw of a default-seeded engine is
// 9981545732273789042). Bounded integers use rejection sampling on the raw
// 64-bit draw, uniform reals take the top 53 bits.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mmcm/corpus.hpp"

namespace mmcm {

enum class DepthPattern { kNone, kConstant, kStepEdge, kGradientRamp, kUniformRandom };

std::string_view to_string(DepthPattern pattern);
DepthPattern parse_depth_pattern(std::string_view name);

struct SynthSpec {
  std::uint32_t width = 16;
  std::uint32_t height = 16;
  int n_models = 3;
  int n_classes = 19;
  double target_pair_agreement = 1.0;
  /// One global value or one value per model.
  std::vector<double> confidence{1.0};
  DepthPattern depth_pattern = DepthPattern::kConstant;
  double depth_value = 1.0;  // used by kConstant
  std::uint64_t seed = 0;
  int scenes = 1;
  int frames_per_scene = 1;
  std::string dataset_id = "synthetic";
  std::string domain_tag = "synthetic";

  /// Throws InvalidSpec / UnrealizableAgreement.
  void validate() const;
  double confidence_of(int model) const;
};

/// Parses the JSON spec format (keys as the field names above, with
/// "confidence_value" accepting a number or an array). Throws ParseError /
/// InvalidSpec.
SynthSpec parse_synth_spec(std::string_view json_text);
SynthSpec load_synth_spec(const std::filesystem::path& path);

struct SynthExpectation {
  std::size_t agreeing_pixels = 0;
  double pair_agreement_fraction = 0.0;
  double mean_agreement = 0.0;
  double mean_confidence = 0.0;
  double mmcm = 0.0;
  // Structural values, present when the pattern has a closed form.
  std::optional<double> depth_entropy;
  std::optional<double> discontinuity_ratio;
  std::optional<double> depth_mean;
};

SynthExpectation expected_values(const SynthSpec& spec, int bins = kDefaultBins,
                                 double tau = kDefaultTau);

/// Seeded 64-bit source shared by every draw of one generated corpus.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform in [0, 1).
  double unit();

 private:
  std::mt19937_64 engine_;
};

/// Builds one frame's predictions and depth in memory.
EnsembleFrame synthesize_frame(const SynthSpec& spec, SynthRng& rng,
                               std::string frame_id);

/// Writes MMC1 rasters, manifest.json and expected.json under `out_dir`.
Manifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace mmcm
