#include "mmcm/consensus.hpp"

#include <cmath>
#include <string>

#include "mmcm/error.hpp"
#include "mmcm/kernels.hpp"

namespace mmcm {
namespace {

template <class A, class B>
void require_same_shape(const A& a, const B& b, const std::string& what) {
  if (a.width != b.width || a.height != b.height) {
    fail(ErrorCode::DimensionMismatch,
         what + ": " + std::to_string(a.width) + "x" + std::to_string(a.height) +
             " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

double agreement_unchecked(const Prediction& a, const Prediction& b) {
  const double total = kernels::weighted_agreement_sum(
      a.labels.labels, b.labels.labels, a.confidence.values,
      b.confidence.values);
  return total / static_cast<double>(a.labels.pixel_count());
}

}  // namespace

void EnsembleFrame::validate() const {
  for (const auto& p : predictions) {
    p.labels.validate();
    p.confidence.validate();
  }
  if (depth) depth->validate();
  check_shapes();
}

void EnsembleFrame::check_shapes() const {
  if (predictions.empty()) return;
  const LabelMap& ref = predictions.front().labels;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    require_same_shape(ref, p.labels, "labels of model " + std::to_string(i));
    require_same_shape(ref, p.confidence,
                       "confidence of model " + std::to_string(i));
  }
  if (depth) require_same_shape(ref, *depth, "depth");
}

double pairwise_agreement(const Prediction& a, const Prediction& b) {
  a.labels.validate();
  b.labels.validate();
  a.confidence.validate();
  b.confidence.validate();
  require_same_shape(a.labels, a.confidence, "first prediction");
  require_same_shape(a.labels, b.labels, "label maps");
  require_same_shape(a.labels, b.confidence, "second prediction");
  return agreement_unchecked(a, b);
}

double mean_confidence(const ConfidenceMap& confidence) {
  return kernels::sum(confidence.values) /
         static_cast<double>(confidence.pixel_count());
}

ConsensusResult consensus(const EnsembleFrame& frame) {
  const std::size_t n = frame.predictions.size();
  if (n < 2) {
    fail(ErrorCode::TooFewModels,
         "frame '" + frame.frame_id + "' has " + std::to_string(n) +
             " model(s); consensus needs at least 2");
  }
  frame.validate();

  ConsensusResult result;
  result.frame_id = frame.frame_id;
  result.pairwise_agreement = PairMatrix(n);

  double pair_total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a =
          agreement_unchecked(frame.predictions[i], frame.predictions[j]);
      result.pairwise_agreement.set(i, j, a);
      pair_total += a;
    }
  }
  result.mean_agreement = pair_total / static_cast<double>(n * (n - 1) / 2);

  double conf_total = 0.0;
  result.per_model_mean_confidence.reserve(n);
  for (const auto& p : frame.predictions) {
    const double c = mean_confidence(p.confidence);
    result.per_model_mean_confidence.push_back(c);
    conf_total += c;
  }
  result.mean_confidence = conf_total / static_cast<double>(n);
  result.mmcm = result.mean_agreement * std::sqrt(result.mean_confidence);
  return result;
}

}  // namespace mmcm
