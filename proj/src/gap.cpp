#include "mmcm/gap.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mmcm/error.hpp"

namespace mmcm {
namespace {

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    fail(ErrorCode::OutOfRangeMean,
         std::string(what) + " " + std::to_string(v) + " outside [0,1]");
  }
}

}  // namespace

ScoreSet group_mean(std::string group_id, std::vector<FrameScore> scores) {
  if (scores.empty()) {
    fail(ErrorCode::EmptyGroup, "group '" + group_id + "' has no scores");
  }
  double total = 0.0;
  for (const auto& s : scores) {
    check_unit(s.mmcm, "score");
    total += s.mmcm;
  }
  ScoreSet set{std::move(group_id), std::move(scores), 0.0};
  set.mean_mmcm = total / static_cast<double>(set.frame_scores.size());
  return set;
}

double perceptual_gap(double mu_a, double mu_b) {
  check_unit(mu_a, "mean");
  check_unit(mu_b, "mean");
  const double hi = std::max(mu_a, mu_b);
  if (hi == 0.0) return 0.0;
  return std::abs(mu_a - mu_b) / hi;
}

GapMatrix gap_matrix(std::span<const ScoreSet> rows,
                     std::span<const ScoreSet> cols) {
  if (rows.empty() || cols.empty()) {
    fail(ErrorCode::EmptyGroup, "gap matrix needs at least one row and column");
  }
  GapMatrix m;
  for (const auto& r : rows) m.row_ids.push_back(r.group_id);
  for (const auto& c : cols) m.col_ids.push_back(c.group_id);
  m.values.reserve(rows.size() * cols.size());
  for (const auto& r : rows) {
    for (const auto& c : cols) {
      m.values.push_back(perceptual_gap(r.mean_mmcm, c.mean_mmcm));
    }
  }
  return m;
}

GapMatrix transpose(const GapMatrix& matrix) {
  GapMatrix t{matrix.col_ids, matrix.row_ids, {}};
  t.values.reserve(matrix.values.size());
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      t.values.push_back(matrix.at(r, c));
    }
  }
  return t;
}

std::vector<RankedGap> aggregate_gaps(const GapMatrix& matrix) {
  const bool intra = matrix.intra();
  std::vector<RankedGap> out;
  out.reserve(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (intra && r == c) continue;
      total += matrix.at(r, c);
      ++count;
    }
    out.push_back({matrix.row_ids[r],
                   count == 0 ? 0.0 : total / static_cast<double>(count)});
  }
  std::sort(out.begin(), out.end(), [](const RankedGap& a, const RankedGap& b) {
    if (a.mean_gap != b.mean_gap) return a.mean_gap > b.mean_gap;
    return a.group_id < b.group_id;
  });
  return out;
}

TrendFit trend_fit(std::vector<Point2> points) {
  const std::size_t n = points.size();
  if (n < 2) {
    fail(ErrorCode::TooFewPoints,
         "trend fit needs at least 2 points, got " + std::to_string(n));
  }
  std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });

  double sx = 0.0;
  double sy = 0.0;
  for (const auto& p : points) {
    sx += p.x;
    sy += p.y;
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);

  // Centered second pass avoids cancellation in the normal equations.
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : points) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (points.front().x == points.back().x || sxx == 0.0) {
    fail(ErrorCode::DegenerateX, "all x values are equal");
  }

  TrendFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.pearson_r =
      syy == 0.0 ? 0.0 : std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return fit;
}

}  // namespace mmcm
