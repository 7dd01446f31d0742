#pragma once

// Report bundle and its serializations.
//
// CSV files (RFC 4180, LF, UTF-8, numbers with 6 significant digits):
//   frame_scores.csv   dataset_id,scene_id,frame_id,mmcm,mean_agreement,
//                      mean_confidence,depth_entropy,depth_mean,
//                      discontinuity_ratio
//   scene_means.csv    dataset_id,scene_id,domain_tag,frames_scored,
//                      frames_failed,mean_mmcm
//   dataset_means.csv  dataset_id,domain_tag,frames_scored,frames_failed,
//                      mean_mmcm,mean_of_scene_means
//   gap_matrix_<name>.csv  row_id,<col ids...>
//   rankings_<name>.csv    axis,rank,group_id,mean_gap
//   trend_<metric>.csv     domain_tag,n,excluded,slope,intercept,pearson_r,
//                          status
// Columns are only ever appended. Missing values are empty cells.
//
// The JSON document carries the same content at full double precision, with
// object keys in alphabetical order and absent values as null.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmcm/corpus.hpp"
#include "mmcm/gap.hpp"
#include "mmcm/svg.hpp"

namespace mmcm {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct RunMetadata {
  std::string tool_version{kToolVersion};
  int bins = kDefaultBins;
  double tau = kDefaultTau;
  std::string timestamp;
  std::string manifest_hash;
  std::size_t frames_total = 0;
  std::size_t frames_scored = 0;
  std::size_t frames_failed = 0;

  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct FrameRow {
  std::string dataset_id;
  std::string scene_id;
  std::string frame_id;
  std::string domain_tag;
  double mmcm = 0.0;
  double mean_agreement = 0.0;
  double mean_confidence = 0.0;
  std::optional<double> depth_entropy;
  std::optional<double> depth_mean;
  std::optional<double> discontinuity_ratio;

  friend bool operator==(const FrameRow&, const FrameRow&) = default;
};

struct SceneRow {
  std::string dataset_id;
  std::string scene_id;
  std::string domain_tag;
  std::size_t frames_scored = 0;
  std::size_t frames_failed = 0;
  std::optional<double> mean_mmcm;

  friend bool operator==(const SceneRow&, const SceneRow&) = default;
};

struct DatasetRow {
  std::string dataset_id;
  std::string domain_tag;
  std::size_t frames_scored = 0;
  std::size_t frames_failed = 0;
  std::optional<double> mean_mmcm;
  std::optional<double> mean_of_scene_means;

  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

struct GapSection {
  std::string name;
  std::string level;  // "scene" or "dataset"
  GapMatrix matrix;
  std::vector<RankedGap> row_ranking;
  std::vector<RankedGap> col_ranking;  // empty for intra matrices

  friend bool operator==(const GapSection&, const GapSection&) = default;
};

struct TrendRow {
  std::string domain_tag;
  std::size_t n = 0;
  std::size_t excluded = 0;  // frames without the x metric
  std::optional<TrendFit> fit;
  std::string status = "ok";  // or the ErrorCode name that prevented a fit

  friend bool operator==(const TrendRow&, const TrendRow&) = default;
};

struct TrendSection {
  std::string metric;
  std::string level;  // "frame" or "scene"
  std::vector<TrendRow> rows;

  friend bool operator==(const TrendSection&, const TrendSection&) = default;
};

struct FailureRow {
  std::string dataset_id;
  std::string scene_id;
  std::string frame_id;
  std::string code;
  std::string message;

  friend bool operator==(const FailureRow&, const FailureRow&) = default;
};

struct ReportBundle {
  RunMetadata meta;
  /// Whether frame/scene/dataset tables are part of this bundle.
  bool include_scores = true;
  std::vector<FrameRow> frames;
  std::vector<SceneRow> scenes;
  std::vector<DatasetRow> datasets;
  std::vector<GapSection> gaps;
  std::vector<TrendSection> trends;
  std::vector<FailureRow> failures;

  friend bool operator==(const ReportBundle&, const ReportBundle&) = default;
};

/// Six significant digits, "%.6g".
std::string sig6(double value);

/// Replaces characters outside [A-Za-z0-9._-] with '_'.
std::string file_safe(std::string_view name);

std::string sha256_hex(std::span<const std::byte> bytes);
std::string file_sha256(const std::filesystem::path& path);
std::string utc_timestamp();

std::vector<FrameRow> frame_rows(const CorpusScores& scores);

/// Frame, scene and dataset tables plus a dataset-level gap section when at
/// least two datasets have a mean.
ReportBundle bundle_from_scores(const Manifest& manifest,
                                const CorpusScores& scores, RunMetadata meta);

GapSection make_gap_section(std::string name, std::string level,
                            GapMatrix matrix);

std::vector<std::filesystem::path> emit_csv(const ReportBundle& bundle,
                                            const std::filesystem::path& out_dir);

nlohmann::json to_json(const ReportBundle& bundle);
ReportBundle bundle_from_json(const nlohmann::json& doc);
void emit_json(const ReportBundle& bundle, const std::filesystem::path& path);

/// Reads a frame_scores.csv written by emit_csv. domain_tag is left empty.
std::vector<FrameRow> read_frame_scores_csv(const std::filesystem::path& path);

void render_heatmap(const GapMatrix& matrix, const std::filesystem::path& path,
                    std::string_view title = {});
void render_scatter(std::span<const svg::Series> series,
                    std::string_view x_label, std::string_view y_label,
                    const std::filesystem::path& path,
                    std::string_view title = {});

}  // namespace mmcm
