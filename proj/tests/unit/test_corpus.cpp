#include <gtest/gtest.h>

#include <json.hpp>

#include "mmcm/corpus.hpp"
#include "mmcm/error.hpp"
#include "mmcm/synthgen.hpp"
#include "support/support.hpp"

using namespace mmcm;
using nlohmann::json;
using testing_support::spit;
using testing_support::TempDir;

namespace {

json minimal_manifest_json() {
  return json::parse(R"({
    "version": "1",
    "models": ["m1", "m2"],
    "datasets": [{"dataset_id": "d", "domain_tag": "real",
      "scenes": [{"scene_id": "s", "frames": [{"frame_id": "f",
        "predictions": [{"labels": "a.l", "confidence": "a.c"},
                        {"labels": "b.l", "confidence": "b.c"}]}]}]}]})");
}

ErrorCode parse_code(const json& doc) {
  try {
    parse_manifest(doc.dump(), ".");
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoFailure;
}

// Writes a frame of two uniform predictions (and optional depth) and
// returns its manifest entry.
FrameEntry write_frame(const std::filesystem::path& dir, const std::string& id,
                       std::uint32_t w, std::uint32_t h, double conf,
                       bool with_depth) {
  FrameEntry e{id, {}, {}};
  for (int m = 0; m < 2; ++m) {
    const std::string stem = id + ".m" + std::to_string(m);
    write_raster(LabelMap{w, h, std::vector<std::uint16_t>(std::size_t{w} * h, 3)},
                 dir / (stem + ".labels.mmc1"));
    write_raster(ConfidenceMap{w, h, std::vector<double>(std::size_t{w} * h, conf),
                               Dtype::kScalarF64},
                 dir / (stem + ".conf.mmc1"));
    e.predictions.push_back({stem + ".labels.mmc1", stem + ".conf.mmc1"});
  }
  if (with_depth) {
    std::vector<double> d(std::size_t{w} * h);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(i % w);
    write_raster(DepthMap{w, h, d, Dtype::kScalarF64}, dir / (id + ".depth.mmc1"));
    e.depth = id + ".depth.mmc1";
  }
  return e;
}

Manifest five_frame_corpus(const std::filesystem::path& dir) {
  Manifest m;
  m.models = {"m1", "m2"};
  m.base_dir = dir;
  DatasetEntry d{"real", "real", {}};
  SceneEntry s{"s1", {}};
  const double confs[] = {1.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 5; ++i) {
    s.frames.push_back(write_frame(dir, "f" + std::to_string(i), 4, 3, confs[i], i % 2 == 0));
  }
  d.scenes.push_back(s);
  m.datasets.push_back(d);
  save_manifest(m, dir / "manifest.json");
  return load_manifest(dir / "manifest.json");
}

}  // namespace

TEST(Manifest, MinimalParses) {
  const auto m = parse_manifest(minimal_manifest_json().dump(), "/base");
  EXPECT_EQ(m.models.size(), 2u);
  ASSERT_EQ(m.datasets.size(), 1u);
  EXPECT_EQ(m.frame_count(), 1u);
  EXPECT_FALSE(m.datasets[0].scenes[0].frames[0].depth.has_value());
  EXPECT_EQ(m.resolve("a.l"), std::filesystem::path("/base/a.l"));
}

TEST(Manifest, ModelCountMismatch) {
  auto doc = minimal_manifest_json();
  doc["datasets"][0]["scenes"][0]["frames"][0]["predictions"].erase(1);
  EXPECT_EQ(parse_code(doc), ErrorCode::ModelCountMismatch);
}

TEST(Manifest, DuplicateIds) {
  auto doc = minimal_manifest_json();
  auto& scenes = doc["datasets"][0]["scenes"];
  scenes.push_back(scenes[0]);
  EXPECT_EQ(parse_code(doc), ErrorCode::DuplicateId);

  auto doc2 = minimal_manifest_json();
  auto& frames = doc2["datasets"][0]["scenes"][0]["frames"];
  frames.push_back(frames[0]);
  EXPECT_EQ(parse_code(doc2), ErrorCode::DuplicateId);

  auto doc3 = minimal_manifest_json();
  doc3["models"] = {"m", "m"};
  EXPECT_EQ(parse_code(doc3), ErrorCode::DuplicateId);
}

TEST(Manifest, SchemaViolations) {
  auto no_version = minimal_manifest_json();
  no_version.erase("version");
  EXPECT_EQ(parse_code(no_version), ErrorCode::SchemaViolation);
  auto wrong_version = minimal_manifest_json();
  wrong_version["version"] = "2";
  EXPECT_EQ(parse_code(wrong_version), ErrorCode::SchemaViolation);
  auto one_model = minimal_manifest_json();
  one_model["models"] = {"m"};
  EXPECT_EQ(parse_code(one_model), ErrorCode::SchemaViolation);
  auto bad_type = minimal_manifest_json();
  bad_type["datasets"][0]["scenes"] = 3;
  EXPECT_EQ(parse_code(bad_type), ErrorCode::SchemaViolation);
  auto empty_scene = minimal_manifest_json();
  empty_scene["datasets"][0]["scenes"][0]["frames"] = json::array();
  EXPECT_EQ(parse_code(empty_scene), ErrorCode::SchemaViolation);
}

TEST(Manifest, MalformedJson) {
  try {
    parse_manifest("{\"version\": ", ".");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Manifest, SaveLoadRoundTrip) {
  TempDir dir;
  auto m = parse_manifest(minimal_manifest_json().dump(), dir.path());
  m.datasets[0].scenes[0].frames[0].depth = "x.depth.mmc1";
  save_manifest(m, dir / "manifest.json");
  const auto back = load_manifest(dir / "manifest.json");
  EXPECT_EQ(manifest_to_json(back), manifest_to_json(m));
  EXPECT_EQ(back.base_dir, dir.path());
}

TEST(Manifest, FilterKeepsOrderAndRejectsUnknown) {
  auto doc = minimal_manifest_json();
  auto second = doc["datasets"][0];
  second["dataset_id"] = "e";
  doc["datasets"].push_back(second);
  const auto m = parse_manifest(doc.dump(), ".");
  const std::vector<std::string> only_e{"e"};
  EXPECT_EQ(filter_manifest(m, only_e, {}).datasets.size(), 1u);
  EXPECT_EQ(filter_manifest(m, only_e, {}).datasets[0].dataset_id, "e");
  const std::vector<std::string> none{"zzz"};
  try {
    filter_manifest(m, none, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownDataset);
  }
}

TEST(Corpus, ValidCorpusHasNoFailures) {
  TempDir dir;
  const auto m = five_frame_corpus(dir.path());
  EXPECT_TRUE(validate_corpus(m, 2).empty());
}

TEST(Corpus, TruncatedConfidenceIsOneFailure) {
  TempDir dir;
  const auto m = five_frame_corpus(dir.path());
  const auto target = dir / "f3.m1.conf.mmc1";
  std::filesystem::resize_file(target, std::filesystem::file_size(target) - 3);
  const auto failures = validate_corpus(m, 2);
  ASSERT_EQ(failures.size(), 1u);
  EXPECT_EQ(failures[0].frame_id, "f3");
  EXPECT_EQ(failures[0].model, "m2");
  EXPECT_EQ(failures[0].code, ErrorCode::TruncatedPayload);
  EXPECT_NE(failures[0].path.find("f3.m1.conf.mmc1"), std::string::npos);
  EXPECT_NE(failures[0].to_line().find("frame=f3"), std::string::npos);
}

TEST(Corpus, DimensionMismatchWithinFrame) {
  TempDir dir;
  auto m = five_frame_corpus(dir.path());
  write_raster(ConfidenceMap{2, 3, std::vector<double>(6, 1.0), Dtype::kScalarF64},
               dir / "f1.m0.conf.mmc1");
  const auto failures = validate_corpus(m, 1);
  ASSERT_EQ(failures.size(), 1u);
  EXPECT_EQ(failures[0].code, ErrorCode::DimensionMismatch);
  EXPECT_EQ(failures[0].frame_id, "f1");
}

TEST(Corpus, MissingFileReported) {
  TempDir dir;
  const auto m = five_frame_corpus(dir.path());
  std::filesystem::remove(dir / "f0.depth.mmc1");
  const auto failures = validate_corpus(m, 1);
  ASSERT_EQ(failures.size(), 1u);
  EXPECT_EQ(failures[0].model, "depth");
  EXPECT_EQ(failures[0].code, ErrorCode::IoFailure);
}

TEST(Corpus, ScoresFollowManifestAndStructuralPresence) {
  TempDir dir;
  const auto m = five_frame_corpus(dir.path());
  const auto scores = score_corpus(m, {256, 0.1, 2});
  ASSERT_EQ(scores.frames.size(), 5u);
  EXPECT_TRUE(scores.failures.empty());
  const double confs[] = {1.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 5; ++i) {
    const auto& f = scores.frames[static_cast<std::size_t>(i)];
    EXPECT_EQ(f.scores.frame_id, "f" + std::to_string(i));
    EXPECT_NEAR(f.scores.consensus.mmcm, confs[i] * std::sqrt(confs[i]), 1e-12);
    EXPECT_EQ(f.scores.structural.has_value(), i % 2 == 0);
  }
}

TEST(Corpus, CorruptFrameIsIsolated) {
  TempDir dir;
  const auto m = five_frame_corpus(dir.path());
  const auto clean = score_corpus(m, {256, 0.1, 1});
  spit(dir / "f2.m0.labels.mmc1", "garbage!");
  const auto scores = score_corpus(m, {256, 0.1, 3});
  ASSERT_EQ(scores.frames.size(), 4u);
  ASSERT_EQ(scores.failures.size(), 1u);
  EXPECT_EQ(scores.failures[0].frame_id, "f2");
  EXPECT_EQ(scores.failures[0].code, ErrorCode::BadMagic);
  for (const auto& f : scores.frames) {
    const auto same = std::find_if(clean.frames.begin(), clean.frames.end(), [&](const auto& c) {
      return c.scores.frame_id == f.scores.frame_id;
    });
    ASSERT_NE(same, clean.frames.end());
    EXPECT_EQ(same->scores.consensus.mmcm, f.scores.consensus.mmcm);
  }
  const auto scenes = summarize_scenes(m, scores);
  ASSERT_EQ(scenes.size(), 1u);
  EXPECT_EQ(scenes[0].frames_scored, 4u);
  EXPECT_EQ(scenes[0].frames_failed, 1u);
  const double want = (1.0 + 0.125 + 0.75 * std::sqrt(0.75) + 1.0) / 4.0;
  EXPECT_NEAR(scenes[0].scores->mean_mmcm, want, 1e-12);
}

TEST(Corpus, AllFramesFailingIsRunLevelError) {
  TempDir dir;
  const auto m = five_frame_corpus(dir.path());
  for (int i = 0; i < 5; ++i) std::filesystem::remove(dir / ("f" + std::to_string(i) + ".m0.labels.mmc1"));
  try {
    score_corpus(m, {256, 0.1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGroup);
  }
}

TEST(Corpus, InvalidParamsAreRunLevel) {
  TempDir dir;
  const auto m = five_frame_corpus(dir.path());
  EXPECT_THROW(score_corpus(m, {0, 0.1, 1}), Error);
  EXPECT_THROW(score_corpus(m, {256, 0.0, 1}), Error);
}

TEST(Corpus, SingleIdenticalFrameScoresOne) {
  TempDir dir;
  Manifest m;
  m.models = {"a", "b"};
  m.base_dir = dir.path();
  m.datasets.push_back({"d", "t", {{"s", {write_frame(dir.path(), "only", 5, 5, 1.0, false)}}}});
  const auto scores = score_corpus(m, {});
  ASSERT_EQ(scores.frames.size(), 1u);
  EXPECT_EQ(scores.frames[0].scores.consensus.mmcm, 1.0);
}

TEST(Corpus, DatasetSummaries) {
  TempDir dir;
  SynthSpec spec;
  spec.scenes = 3;
  spec.frames_per_scene = 2;
  spec.target_pair_agreement = 0.5;
  spec.confidence = {0.25};
  const auto m = generate(spec, dir.path());
  const auto scores = score_corpus(m, {256, 0.1, 2});
  const auto ds = summarize_datasets(m, scores);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].frames_scored, 6u);
  EXPECT_NEAR(ds[0].scores->mean_mmcm, 0.5 * 0.25 * 0.5, 1e-12);
  EXPECT_NEAR(*ds[0].mean_of_scene_means, 0.5 * 0.25 * 0.5, 1e-12);
}

TEST(Corpus, LoadIntoReusesAcrossShapesAndFailures) {
  TempDir dir;
  Manifest m;
  m.base_dir = dir.path();
  const auto big = write_frame(dir.path(), "big", 9, 7, 0.5, true);
  const auto small = write_frame(dir.path(), "small", 3, 2, 0.25, false);
  auto broken = small;
  broken.frame_id = "broken";
  spit(dir / "bad.conf.mmc1", "MMC1");
  broken.predictions[1].confidence = "bad.conf.mmc1";

  EnsembleFrame scratch;
  load_frame_into(m, big, scratch);
  EXPECT_TRUE(scratch.depth.has_value());
  EXPECT_THROW(load_frame_into(m, broken, scratch), Error);
  load_frame_into(m, small, scratch);
  const auto fresh = load_frame(m, small);
  EXPECT_FALSE(scratch.depth.has_value());
  ASSERT_EQ(scratch.predictions.size(), fresh.predictions.size());
  for (std::size_t i = 0; i < fresh.predictions.size(); ++i) {
    EXPECT_EQ(scratch.predictions[i].labels.labels, fresh.predictions[i].labels.labels);
    EXPECT_EQ(scratch.predictions[i].labels.width, 3u);
    EXPECT_EQ(scratch.predictions[i].confidence.values,
              fresh.predictions[i].confidence.values);
  }
  EXPECT_EQ(score_frame(scratch, 256, 0.1).consensus.mmcm,
            score_frame(fresh, 256, 0.1).consensus.mmcm);
}
