#include <gtest/gtest.h>

#include <algorithm>

#include "mmcm/error.hpp"
#include "mmcm/gap.hpp"
#include "reference/reference.hpp"
#include "support/support.hpp"

using namespace mmcm;
using testing_support::Gen;

namespace {

ScoreSet set(std::string id, double mean) { return group_mean(std::move(id), {{"f", mean}}); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoFailure;
}

}  // namespace

TEST(Gap, GroupMean) {
  EXPECT_EQ(group_mean("a", {{"x", 0.5}}).mean_mmcm, 0.5);
  EXPECT_EQ(group_mean("a", {{"x", 0.0}, {"y", 1.0}}).mean_mmcm, 0.5);
  EXPECT_EQ(code_of([] { group_mean("a", {}); }), ErrorCode::EmptyGroup);
  EXPECT_EQ(code_of([] { group_mean("a", {{"x", 1.5}}); }), ErrorCode::OutOfRangeMean);
}

TEST(Gap, TableMeansGap) {
  EXPECT_NEAR(perceptual_gap(0.6926, 0.5693), 0.178025, 1e-6);
  EXPECT_NEAR(perceptual_gap(0.6926, 0.5693), (0.6926 - 0.5693) / 0.6926, 1e-15);
}

TEST(Gap, DegenerateAndIdentity) {
  EXPECT_EQ(perceptual_gap(0.0, 0.0), 0.0);
  EXPECT_EQ(perceptual_gap(0.37, 0.37), 0.0);
  EXPECT_EQ(perceptual_gap(0.0, 0.4), 1.0);
  EXPECT_EQ(code_of([] { perceptual_gap(-0.1, 0.5); }), ErrorCode::OutOfRangeMean);
  EXPECT_EQ(code_of([] { perceptual_gap(0.5, 1.01); }), ErrorCode::OutOfRangeMean);
}

TEST(Gap, MatrixExamples) {
  const std::vector<ScoreSet> same{set("a", 0.5), set("b", 0.5)};
  const auto z = gap_matrix(same, same);
  EXPECT_EQ(z.values, (std::vector<double>{0, 0, 0, 0}));
  EXPECT_TRUE(z.intra());

  const std::vector<ScoreSet> rows{set("r", 0.8)};
  const std::vector<ScoreSet> cols{set("c", 0.4)};
  const auto m = gap_matrix(rows, cols);
  ASSERT_EQ(m.values.size(), 1u);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0.5);
  EXPECT_FALSE(m.intra());
  const auto ranking = aggregate_gaps(m);
  ASSERT_EQ(ranking.size(), 1u);
  EXPECT_EQ(ranking[0].group_id, "r");
  EXPECT_DOUBLE_EQ(ranking[0].mean_gap, 0.5);

  EXPECT_EQ(code_of([&] { gap_matrix({}, cols); }), ErrorCode::EmptyGroup);
}

TEST(Gap, IntraAggregationTieBreak) {
  GapMatrix m{{"A", "B", "C"}, {"A", "B", "C"}, {0, 0.2, 0.4, 0.2, 0, 0.2, 0.4, 0.2, 0}};
  const auto r = aggregate_gaps(m);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].group_id, "A");
  EXPECT_EQ(r[1].group_id, "C");
  EXPECT_EQ(r[2].group_id, "B");
  EXPECT_NEAR(r[0].mean_gap, 0.3, 1e-15);
  EXPECT_NEAR(r[1].mean_gap, 0.3, 1e-15);
  EXPECT_NEAR(r[2].mean_gap, 0.2, 1e-15);
}

TEST(Gap, AllEqualMeansRankLexicographically) {
  const std::vector<ScoreSet> s{set("z", 0.3), set("b", 0.3), set("m", 0.3)};
  const auto r = aggregate_gaps(gap_matrix(s, s));
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].group_id, "b");
  EXPECT_EQ(r[1].group_id, "m");
  EXPECT_EQ(r[2].group_id, "z");
  for (const auto& e : r) EXPECT_EQ(e.mean_gap, 0.0);
}

TEST(Gap, SingleGroupIntraIsZero) {
  const std::vector<ScoreSet> s{set("only", 0.7)};
  const auto m = gap_matrix(s, s);
  EXPECT_EQ(m.values, std::vector<double>{0.0});
  const auto r = aggregate_gaps(m);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].mean_gap, 0.0);
}

TEST(Gap, TransposeRanksColumns) {
  const std::vector<ScoreSet> rows{set("r1", 0.8), set("r2", 0.4)};
  const std::vector<ScoreSet> cols{set("c1", 0.4), set("c2", 0.2), set("c3", 0.8)};
  const auto m = gap_matrix(rows, cols);
  const auto t = transpose(m);
  EXPECT_EQ(t.row_ids, m.col_ids);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) EXPECT_EQ(t.at(c, r), m.at(r, c));
  }
}

TEST(Gap, TrendExactLines) {
  const auto up = trend_fit({{0, 0}, {1, 1}, {2, 2}});
  EXPECT_DOUBLE_EQ(up.slope, 1.0);
  EXPECT_DOUBLE_EQ(up.intercept, 0.0);
  EXPECT_DOUBLE_EQ(up.pearson_r, 1.0);
  EXPECT_EQ(up.n, 3u);
  const auto down = trend_fit({{0, 1}, {1, 0}});
  EXPECT_DOUBLE_EQ(down.slope, -1.0);
  EXPECT_DOUBLE_EQ(down.intercept, 1.0);
  EXPECT_DOUBLE_EQ(down.pearson_r, -1.0);
}

TEST(Gap, TrendErrors) {
  EXPECT_EQ(code_of([] { trend_fit({{1, 1}}); }), ErrorCode::TooFewPoints);
  EXPECT_EQ(code_of([] { trend_fit({{1, 1}, {1, 2}, {1, 3}}); }), ErrorCode::DegenerateX);
}

TEST(Gap, TrendConstantYHasZeroCorrelation) {
  const auto f = trend_fit({{0, 0.5}, {1, 0.5}, {3, 0.5}});
  EXPECT_EQ(f.slope, 0.0);
  EXPECT_EQ(f.intercept, 0.5);
  EXPECT_EQ(f.pearson_r, 0.0);
}

TEST(Gap, TrendMatchesNormalEquationOracle) {
  Gen g(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> pts;
    const double a = g.real(-2, 2);
    const double b = g.real(-1, 1);
    for (int i = 0; i < 100; ++i) {
      const double x = g.real(0, 6);
      pts.push_back({x, a + b * x + g.real(-0.3, 0.3)});
    }
    const auto fit = trend_fit(pts);
    const auto o = ref::fit(pts);
    EXPECT_NEAR(fit.slope, o.slope, 1e-9);
    EXPECT_NEAR(fit.intercept, o.intercept, 1e-9);
    EXPECT_NEAR(fit.pearson_r, o.r, 1e-9);
  }
}

TEST(Gap, TrendIsOrderIndependent) {
  Gen g(43);
  std::vector<Point2> pts;
  for (int i = 0; i < 60; ++i) pts.push_back({g.real(0, 1), g.real(0, 1)});
  const auto base = trend_fit(pts);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(pts.begin(), pts.end(), g.rng);
    EXPECT_EQ(trend_fit(pts), base);
  }
}
