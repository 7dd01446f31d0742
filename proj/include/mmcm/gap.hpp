#pragma once

// Group means of consensus scores, the relative perceptual gap between two
// means, gap matrices with their row-mean rankings, and least-squares trend
// fits used for metric-vs-consensus scatter plots.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mmcm {

struct FrameScore {
  std::string frame_id;
  double mmcm = 0.0;
};

struct ScoreSet {
  std::string group_id;
  std::vector<FrameScore> frame_scores;
  double mean_mmcm = 0.0;
};

/// Mean summed in input order. Throws EmptyGroup, OutOfRangeMean for scores
/// outside [0,1].
ScoreSet group_mean(std::string group_id, std::vector<FrameScore> scores);

/// |a - b| / max(a, b), and 0 when both are 0. Throws OutOfRangeMean.
double perceptual_gap(double mu_a, double mu_b);

struct GapMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<double> values;  // row-major, rows x cols

  std::size_t rows() const { return row_ids.size(); }
  std::size_t cols() const { return col_ids.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  /// Rows and columns are the same groups (intra-domain comparison).
  bool intra() const { return row_ids == col_ids; }

  friend bool operator==(const GapMatrix&, const GapMatrix&) = default;
};

GapMatrix gap_matrix(std::span<const ScoreSet> rows,
                     std::span<const ScoreSet> cols);

GapMatrix transpose(const GapMatrix& matrix);

struct RankedGap {
  std::string group_id;
  double mean_gap = 0.0;

  friend bool operator==(const RankedGap&, const RankedGap&) = default;
};

/// Per-row mean gap (self pair excluded for intra matrices), sorted by
/// descending mean then ascending id.
std::vector<RankedGap> aggregate_gaps(const GapMatrix& matrix);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
  std::size_t n = 0;

  friend bool operator==(const TrendFit&, const TrendFit&) = default;
};

/// Ordinary least squares y = intercept + slope*x. Points are sorted by
/// (x, y) before summation so the result does not depend on input order.
/// Throws TooFewPoints (n < 2) and DegenerateX (all x equal).
TrendFit trend_fit(std::vector<Point2> points);

}  // namespace mmcm
