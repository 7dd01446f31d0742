#include <gtest/gtest.h>

#include <algorithm>

#include "mmcm/csv.hpp"
#include "mmcm/report.hpp"
#include "mmcm/synthgen.hpp"
#include "support/support.hpp"

using namespace mmcm;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

RunMetadata fixed_meta() {
  RunMetadata meta;
  meta.timestamp = "2026-01-01T00:00:00Z";
  meta.manifest_hash = "abc";
  return meta;
}

ReportBundle bundle_for(const SynthSpec& spec, const std::filesystem::path& dir) {
  const auto m = generate(spec, dir);
  return bundle_from_scores(m, score_corpus(m, {256, 0.1, 1}), fixed_meta());
}

}  // namespace

TEST(Report, SigSixFormatting) {
  EXPECT_EQ(sig6(0.384), "0.384");
  EXPECT_EQ(sig6(1.0 / 3.0), "0.333333");
  EXPECT_EQ(sig6(0.6931471805599453), "0.693147");
  EXPECT_EQ(sig6(123456789.0), "1.23457e+08");
  EXPECT_EQ(sig6(0.0), "0");
}

TEST(Report, OneFrameCorpusHasTwoLines) {
  TempDir corpus;
  TempDir out;
  SynthSpec spec;
  const auto b = bundle_for(spec, corpus.path());
  emit_csv(b, out.path());
  const auto text = slurp(out / "frame_scores.csv");
  EXPECT_EQ(line_count(text), 2u);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "dataset_id,scene_id,frame_id,mmcm,mean_agreement,mean_confidence,"
            "depth_entropy,depth_mean,discontinuity_ratio");
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Report, MissingStructuralGivesEmptyCells) {
  TempDir corpus;
  TempDir out;
  SynthSpec spec;
  spec.depth_pattern = DepthPattern::kNone;
  emit_csv(bundle_for(spec, corpus.path()), out.path());
  const auto rows = csv::parse(slurp(out / "frame_scores.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][6], "");
  EXPECT_EQ(rows[1][7], "");
  EXPECT_EQ(rows[1][8], "");
  EXPECT_EQ(rows[1][3], "1");
}

TEST(Report, SingleGroupHasNoGapSection) {
  TempDir corpus;
  SynthSpec spec;
  const auto b = bundle_for(spec, corpus.path());
  EXPECT_TRUE(b.gaps.empty());
  EXPECT_TRUE(to_json(b).at("gaps").empty());
}

TEST(Report, JsonRoundTrip) {
  TempDir corpus;
  TempDir out;
  SynthSpec spec;
  spec.scenes = 2;
  spec.frames_per_scene = 2;
  spec.target_pair_agreement = 0.3;
  spec.confidence = {0.7};
  const auto m = generate(spec, corpus.path());
  auto b = bundle_from_scores(m, score_corpus(m, {}), fixed_meta());
  b.gaps.push_back(make_gap_section("x", "scene", GapMatrix{{"a", "b"}, {"c"}, {0.1, 1.0 / 3.0}}));
  b.trends.push_back({"depth_mean", "frame",
                      {{"t", 4, 1, TrendFit{0.1, 0.2, 0.3, 4}, "ok"},
                       {"u", 2, 0, {}, "DegenerateX"}}});
  b.failures.push_back({"d", "s", "f", "BadMagic", "missing MMC1 magic"});
  emit_json(b, out / "run.json");
  const auto back = bundle_from_json(nlohmann::json::parse(slurp(out / "run.json")));
  EXPECT_EQ(back, b);
}

TEST(Report, JsonKeysAreSortedAndNeverNaN) {
  TempDir corpus;
  TempDir out;
  SynthSpec spec;
  spec.depth_pattern = DepthPattern::kNone;
  const auto b = bundle_for(spec, corpus.path());
  emit_json(b, out / "run.json");
  const auto text = slurp(out / "run.json");
  EXPECT_EQ(text.find("NaN"), std::string::npos);
  EXPECT_EQ(text.find("nan"), std::string::npos);
  EXPECT_NE(text.find("\"depth_entropy\": null"), std::string::npos);
  EXPECT_LT(text.find("\"datasets\""), text.find("\"frames\""));
  EXPECT_LT(text.find("\"frames\""), text.find("\"meta\""));
}

TEST(Report, EmissionIsDeterministic) {
  TempDir corpus;
  TempDir a;
  TempDir b;
  SynthSpec spec;
  spec.scenes = 3;
  spec.target_pair_agreement = 0.6;
  spec.depth_pattern = DepthPattern::kUniformRandom;
  const auto bundle = bundle_for(spec, corpus.path());
  const auto files = emit_csv(bundle, a.path());
  emit_csv(bundle, b.path());
  for (const auto& f : files) EXPECT_EQ(slurp(f), slurp(b / f.filename().string()));
  emit_json(bundle, a / "r.json");
  emit_json(bundle, b / "r.json");
  EXPECT_EQ(slurp(a / "r.json"), slurp(b / "r.json"));
}

TEST(Report, GapAndRankingFiles) {
  TempDir out;
  ReportBundle b;
  b.include_scores = false;
  b.gaps.push_back(make_gap_section("cross/1", "scene",
                                    GapMatrix{{"r1", "r2"}, {"c1", "c2"}, {0.5, 0.1, 0.2, 0.2}}));
  const auto files = emit_csv(b, out.path());
  ASSERT_EQ(files.size(), 2u);
  EXPECT_FALSE(std::filesystem::exists(out / "frame_scores.csv"));
  EXPECT_EQ(slurp(out / "gap_matrix_cross_1.csv"), "row_id,c1,c2\nr1,0.5,0.1\nr2,0.2,0.2\n");
  EXPECT_EQ(slurp(out / "rankings_cross_1.csv"),
            "axis,rank,group_id,mean_gap\n"
            "rows,1,r1,0.3\nrows,2,r2,0.2\n"
            "cols,1,c1,0.35\ncols,2,c2,0.15\n");
}

TEST(Report, FrameScoresCsvReadsBack) {
  TempDir corpus;
  TempDir out;
  SynthSpec spec;
  spec.scenes = 2;
  spec.depth_pattern = DepthPattern::kGradientRamp;
  const auto b = bundle_for(spec, corpus.path());
  emit_csv(b, out.path());
  const auto rows = read_frame_scores_csv(out / "frame_scores.csv");
  ASSERT_EQ(rows.size(), b.frames.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].frame_id, b.frames[i].frame_id);
    EXPECT_NEAR(rows[i].mmcm, b.frames[i].mmcm, 1e-6);
    ASSERT_TRUE(rows[i].depth_entropy.has_value());
    EXPECT_NEAR(*rows[i].depth_entropy, *b.frames[i].depth_entropy, 1e-5);
  }
}

TEST(Report, Sha256KnownVector) {
  const std::string abc = "abc";
  EXPECT_EQ(sha256_hex(std::as_bytes(std::span(abc.data(), abc.size()))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
