#pragma once

// Multi-model consensus for one image: confidence-weighted pairwise
// agreement, its mean over unordered model pairs, the mean model confidence,
// and the consensus score mean_agreement * sqrt(mean_confidence).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mmcm/raster.hpp"

namespace mmcm {

struct Prediction {
  LabelMap labels;
  ConfidenceMap confidence;
};

struct EnsembleFrame {
  std::string frame_id;
  std::vector<Prediction> predictions;
  std::optional<DepthMap> depth;

  /// Throws DimensionMismatch if any raster differs in size from the first
  /// label map, and re-runs every raster's own validation.
  void validate() const;

  /// The size checks of validate() without the per-value scans. For frames
  /// whose rasters were validated when decoded.
  void check_shapes() const;
};

/// Symmetric N×N matrix of pair agreements. The diagonal is not a model
/// pair; it is stored as 0 and never read.
class PairMatrix {
 public:
  PairMatrix() = default;
  explicit PairMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double value) {
    values_[i * n_ + j] = value;
    values_[j * n_ + i] = value;
  }

  friend bool operator==(const PairMatrix&, const PairMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct ConsensusResult {
  std::string frame_id;
  PairMatrix pairwise_agreement;
  double mean_agreement = 0.0;
  double mean_confidence = 0.0;
  std::vector<double> per_model_mean_confidence;
  double mmcm = 0.0;
};

/// (1/|I|) Σ δ(S_a, S_b) √(C_a C_b). Throws DimensionMismatch.
double pairwise_agreement(const Prediction& a, const Prediction& b);

double mean_confidence(const ConfidenceMap& confidence);

/// Throws TooFewModels when fewer than two predictions are present.
ConsensusResult consensus(const EnsembleFrame& frame);

}  // namespace mmcm
