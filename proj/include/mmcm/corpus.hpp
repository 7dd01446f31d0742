#pragma once

// Manifest-driven corpus: datasets -> scenes -> frames, each frame naming
// one (labels, confidence) raster pair per model plus an optional depth
// raster. Paths are relative to the manifest's directory.
//
// Manifest schema (UTF-8 JSON):
//   {"version": "1",
//    "models": ["m1", "m2", ...],
//    "datasets": [{"dataset_id": "...", "domain_tag": "...",
//      "scenes": [{"scene_id": "...",
//        "frames": [{"frame_id": "...",
//          "predictions": [{"labels": "a.labels.mmc1",
//                           "confidence": "a.conf.mmc1"}, ...],
//          "depth": "a.depth.mmc1"}]}]}]}
// "predictions" follows the order of "models"; "depth" may be absent.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmcm/consensus.hpp"
#include "mmcm/error.hpp"
#include "mmcm/gap.hpp"
#include "mmcm/structural.hpp"

namespace mmcm {

inline constexpr std::string_view kManifestVersion = "1";

struct PredictionPaths {
  std::string labels;
  std::string confidence;
};

struct FrameEntry {
  std::string frame_id;
  std::vector<PredictionPaths> predictions;
  std::optional<std::string> depth;
};

struct SceneEntry {
  std::string scene_id;
  std::vector<FrameEntry> frames;
};

struct DatasetEntry {
  std::string dataset_id;
  std::string domain_tag;
  std::vector<SceneEntry> scenes;
};

struct Manifest {
  std::string version{kManifestVersion};
  std::vector<std::string> models;
  std::vector<DatasetEntry> datasets;
  /// Directory relative paths are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
  std::size_t frame_count() const;
  const DatasetEntry* find_dataset(std::string_view id) const;
};

/// Position of one frame in manifest traversal order.
struct FrameRef {
  std::size_t dataset = 0;
  std::size_t scene = 0;
  std::size_t frame = 0;
};

std::vector<FrameRef> frame_refs(const Manifest& manifest);

/// Throws ParseError, SchemaViolation, DuplicateId, ModelCountMismatch.
Manifest parse_manifest(std::string_view json_text,
                        const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const Manifest& manifest);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Keeps only the named datasets / scenes (exact id match; empty list keeps
/// everything). Throws UnknownDataset for a dataset id that does not exist.
Manifest filter_manifest(const Manifest& manifest,
                         std::span<const std::string> datasets,
                         std::span<const std::string> scenes);

struct ValidationFailure {
  std::string dataset_id;
  std::string scene_id;
  std::string frame_id;
  std::string model;  // model name, or "depth"
  std::string path;
  ErrorCode code = ErrorCode::IoFailure;
  std::string message;

  std::string to_line() const;
};

/// 0 means "use hardware parallelism".
int resolve_workers(int requested);

/// Opens and fully decodes every referenced raster and cross-checks
/// dimensions within each frame. Reports every failure, in manifest order.
std::vector<ValidationFailure> validate_corpus(const Manifest& manifest,
                                               int workers = 0);

struct ScoreParams {
  int bins = kDefaultBins;
  double tau = kDefaultTau;
  int workers = 0;
};

struct FrameScores {
  std::string frame_id;
  ConsensusResult consensus;
  std::optional<StructuralResult> structural;
};

struct ScoredFrame {
  std::string dataset_id;
  std::string scene_id;
  std::string domain_tag;
  FrameScores scores;
};

struct FrameFailure {
  std::string dataset_id;
  std::string scene_id;
  std::string frame_id;
  ErrorCode code = ErrorCode::IoFailure;
  std::string message;
};

struct CorpusScores {
  std::vector<ScoredFrame> frames;      // manifest order
  std::vector<FrameFailure> failures;   // manifest order
};

EnsembleFrame load_frame(const Manifest& manifest, const FrameEntry& entry);
/// load_frame into an existing frame, reusing its raster storage.
void load_frame_into(const Manifest& manifest, const FrameEntry& entry,
                     EnsembleFrame& frame);
FrameScores score_frame(const EnsembleFrame& frame, int bins, double tau);

/// Scores every frame on a pool of `params.workers` threads. A failing
/// frame is recorded and skipped; if no frame succeeds the call throws
/// (EmptyGroup). Output is independent of the worker count.
CorpusScores score_corpus(const Manifest& manifest, const ScoreParams& params);

struct SceneSummary {
  std::string dataset_id;
  std::string scene_id;
  std::string domain_tag;
  std::size_t frames_scored = 0;
  std::size_t frames_failed = 0;
  std::optional<ScoreSet> scores;  // absent when no frame scored
};

struct DatasetSummary {
  std::string dataset_id;
  std::string domain_tag;
  std::size_t frames_scored = 0;
  std::size_t frames_failed = 0;
  std::optional<ScoreSet> scores;  // mean over all scored frames
  std::optional<double> mean_of_scene_means;
};

std::vector<SceneSummary> summarize_scenes(const Manifest& manifest,
                                           const CorpusScores& scores);
std::vector<DatasetSummary> summarize_datasets(const Manifest& manifest,
                                               const CorpusScores& scores);

}  // namespace mmcm
