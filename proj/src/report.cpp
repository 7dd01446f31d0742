#include "mmcm/report.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "mmcm/csv.hpp"
#include "mmcm/error.hpp"

namespace mmcm {
namespace {

using nlohmann::json;

std::string cell(const std::optional<double>& v) { return v ? sig6(*v) : std::string(); }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path.string());
}

json ranking_json(const std::vector<RankedGap>& ranking) {
  json arr = json::array();
  for (const auto& r : ranking) {
    arr.push_back({{"group_id", r.group_id}, {"mean_gap", r.mean_gap}});
  }
  return arr;
}

std::vector<RankedGap> ranking_from(const json& arr) {
  std::vector<RankedGap> out;
  for (const auto& r : arr) {
    out.push_back({r.at("group_id").get<std::string>(), r.at("mean_gap").get<double>()});
  }
  return out;
}

void ranking_rows(std::string& text, const char* axis,
                  const std::vector<RankedGap>& ranking) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    text += csv::row({axis, std::to_string(i + 1), ranking[i].group_id,
                      sig6(ranking[i].mean_gap)});
  }
}

}  // namespace

std::string sig6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string file_safe(std::string_view name) {
  std::string out(name);
  for (char& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '.' || ch == '_' ||
                    ch == '-';
    if (!ok) ch = '_';
  }
  return out;
}

std::string sha256_hex(std::span<const std::byte> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    fail(ErrorCode::IoFailure, "SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  return sha256_hex(std::as_bytes(std::span(data.data(), data.size())));
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<FrameRow> frame_rows(const CorpusScores& scores) {
  std::vector<FrameRow> rows;
  rows.reserve(scores.frames.size());
  for (const auto& f : scores.frames) {
    FrameRow row{f.dataset_id,
                 f.scene_id,
                 f.scores.frame_id,
                 f.domain_tag,
                 f.scores.consensus.mmcm,
                 f.scores.consensus.mean_agreement,
                 f.scores.consensus.mean_confidence,
                 {},
                 {},
                 {}};
    if (f.scores.structural) {
      row.depth_entropy = f.scores.structural->depth_entropy;
      row.depth_mean = f.scores.structural->depth_mean;
      row.discontinuity_ratio = f.scores.structural->discontinuity_ratio;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

GapSection make_gap_section(std::string name, std::string level,
                            GapMatrix matrix) {
  GapSection section{std::move(name), std::move(level), std::move(matrix), {}, {}};
  section.row_ranking = aggregate_gaps(section.matrix);
  if (!section.matrix.intra()) {
    section.col_ranking = aggregate_gaps(transpose(section.matrix));
  }
  return section;
}

ReportBundle bundle_from_scores(const Manifest& manifest,
                                const CorpusScores& scores, RunMetadata meta) {
  ReportBundle b;
  b.meta = std::move(meta);
  b.meta.frames_total = manifest.frame_count();
  b.meta.frames_scored = scores.frames.size();
  b.meta.frames_failed = scores.failures.size();
  b.frames = frame_rows(scores);

  for (const auto& s : summarize_scenes(manifest, scores)) {
    b.scenes.push_back({s.dataset_id, s.scene_id, s.domain_tag, s.frames_scored,
                        s.frames_failed,
                        s.scores ? std::optional(s.scores->mean_mmcm) : std::nullopt});
  }
  std::vector<ScoreSet> dataset_sets;
  for (const auto& d : summarize_datasets(manifest, scores)) {
    b.datasets.push_back({d.dataset_id, d.domain_tag, d.frames_scored,
                          d.frames_failed,
                          d.scores ? std::optional(d.scores->mean_mmcm) : std::nullopt,
                          d.mean_of_scene_means});
    if (d.scores) dataset_sets.push_back(*d.scores);
  }
  if (dataset_sets.size() >= 2) {
    b.gaps.push_back(make_gap_section("datasets", "dataset",
                                      gap_matrix(dataset_sets, dataset_sets)));
  }
  for (const auto& f : scores.failures) {
    b.failures.push_back({f.dataset_id, f.scene_id, f.frame_id,
                          std::string(to_string(f.code)), f.message});
  }
  return b;
}

std::vector<std::filesystem::path> emit_csv(const ReportBundle& bundle,
                                            const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + out_dir.string());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = out_dir / name;
    write_text(path, text);
    written.push_back(path);
  };

  if (bundle.include_scores) {
    std::string frames = csv::row({"dataset_id", "scene_id", "frame_id", "mmcm",
                                   "mean_agreement", "mean_confidence",
                                   "depth_entropy", "depth_mean",
                                   "discontinuity_ratio"});
    for (const auto& f : bundle.frames) {
      frames += csv::row({f.dataset_id, f.scene_id, f.frame_id, sig6(f.mmcm),
                          sig6(f.mean_agreement), sig6(f.mean_confidence),
                          cell(f.depth_entropy), cell(f.depth_mean),
                          cell(f.discontinuity_ratio)});
    }
    emit("frame_scores.csv", frames);

    std::string scenes = csv::row({"dataset_id", "scene_id", "domain_tag",
                                   "frames_scored", "frames_failed", "mean_mmcm"});
    for (const auto& s : bundle.scenes) {
      scenes += csv::row({s.dataset_id, s.scene_id, s.domain_tag,
                          std::to_string(s.frames_scored),
                          std::to_string(s.frames_failed), cell(s.mean_mmcm)});
    }
    emit("scene_means.csv", scenes);

    std::string datasets = csv::row({"dataset_id", "domain_tag", "frames_scored",
                                     "frames_failed", "mean_mmcm",
                                     "mean_of_scene_means"});
    for (const auto& d : bundle.datasets) {
      datasets += csv::row({d.dataset_id, d.domain_tag,
                            std::to_string(d.frames_scored),
                            std::to_string(d.frames_failed), cell(d.mean_mmcm),
                            cell(d.mean_of_scene_means)});
    }
    emit("dataset_means.csv", datasets);
  }

  for (const auto& g : bundle.gaps) {
    std::vector<std::string> head{"row_id"};
    head.insert(head.end(), g.matrix.col_ids.begin(), g.matrix.col_ids.end());
    std::string text = csv::row(head);
    for (std::size_t r = 0; r < g.matrix.rows(); ++r) {
      std::vector<std::string> fields{g.matrix.row_ids[r]};
      for (std::size_t c = 0; c < g.matrix.cols(); ++c) {
        fields.push_back(sig6(g.matrix.at(r, c)));
      }
      text += csv::row(fields);
    }
    emit("gap_matrix_" + file_safe(g.name) + ".csv", text);

    std::string ranks = csv::row({"axis", "rank", "group_id", "mean_gap"});
    ranking_rows(ranks, "rows", g.row_ranking);
    ranking_rows(ranks, "cols", g.col_ranking);
    emit("rankings_" + file_safe(g.name) + ".csv", ranks);
  }

  for (const auto& t : bundle.trends) {
    std::string text = csv::row({"domain_tag", "n", "excluded", "slope",
                                 "intercept", "pearson_r", "status"});
    for (const auto& r : t.rows) {
      text += csv::row({r.domain_tag, std::to_string(r.n),
                        std::to_string(r.excluded),
                        r.fit ? sig6(r.fit->slope) : "",
                        r.fit ? sig6(r.fit->intercept) : "",
                        r.fit ? sig6(r.fit->pearson_r) : "", r.status});
    }
    emit("trend_" + file_safe(t.metric) + ".csv", text);
  }
  return written;
}

json to_json(const ReportBundle& b) {
  json doc;
  doc["meta"] = {{"bins", b.meta.bins},
                 {"frames_failed", b.meta.frames_failed},
                 {"frames_scored", b.meta.frames_scored},
                 {"frames_total", b.meta.frames_total},
                 {"manifest_hash", b.meta.manifest_hash},
                 {"tau", b.meta.tau},
                 {"timestamp", b.meta.timestamp},
                 {"tool_version", b.meta.tool_version}};
  doc["include_scores"] = b.include_scores;

  doc["frames"] = json::array();
  for (const auto& f : b.frames) {
    doc["frames"].push_back({{"dataset_id", f.dataset_id},
                             {"scene_id", f.scene_id},
                             {"frame_id", f.frame_id},
                             {"domain_tag", f.domain_tag},
                             {"mmcm", f.mmcm},
                             {"mean_agreement", f.mean_agreement},
                             {"mean_confidence", f.mean_confidence},
                             {"depth_entropy", opt(f.depth_entropy)},
                             {"depth_mean", opt(f.depth_mean)},
                             {"discontinuity_ratio", opt(f.discontinuity_ratio)}});
  }
  doc["scenes"] = json::array();
  for (const auto& s : b.scenes) {
    doc["scenes"].push_back({{"dataset_id", s.dataset_id},
                             {"scene_id", s.scene_id},
                             {"domain_tag", s.domain_tag},
                             {"frames_scored", s.frames_scored},
                             {"frames_failed", s.frames_failed},
                             {"mean_mmcm", opt(s.mean_mmcm)}});
  }
  doc["datasets"] = json::array();
  for (const auto& d : b.datasets) {
    doc["datasets"].push_back({{"dataset_id", d.dataset_id},
                               {"domain_tag", d.domain_tag},
                               {"frames_scored", d.frames_scored},
                               {"frames_failed", d.frames_failed},
                               {"mean_mmcm", opt(d.mean_mmcm)},
                               {"mean_of_scene_means", opt(d.mean_of_scene_means)}});
  }
  doc["gaps"] = json::array();
  for (const auto& g : b.gaps) {
    doc["gaps"].push_back({{"name", g.name},
                           {"level", g.level},
                           {"row_ids", g.matrix.row_ids},
                           {"col_ids", g.matrix.col_ids},
                           {"values", g.matrix.values},
                           {"row_ranking", ranking_json(g.row_ranking)},
                           {"col_ranking", ranking_json(g.col_ranking)}});
  }
  doc["trends"] = json::array();
  for (const auto& t : b.trends) {
    json rows = json::array();
    for (const auto& r : t.rows) {
      json row{{"domain_tag", r.domain_tag},
               {"n", r.n},
               {"excluded", r.excluded},
               {"status", r.status},
               {"fit", nullptr}};
      if (r.fit) {
        row["fit"] = {{"slope", r.fit->slope},
                      {"intercept", r.fit->intercept},
                      {"pearson_r", r.fit->pearson_r},
                      {"n", r.fit->n}};
      }
      rows.push_back(std::move(row));
    }
    doc["trends"].push_back({{"metric", t.metric}, {"level", t.level}, {"rows", rows}});
  }
  doc["failures"] = json::array();
  for (const auto& f : b.failures) {
    doc["failures"].push_back({{"dataset_id", f.dataset_id},
                               {"scene_id", f.scene_id},
                               {"frame_id", f.frame_id},
                               {"code", f.code},
                               {"message", f.message}});
  }
  return doc;
}

ReportBundle bundle_from_json(const json& doc) {
  ReportBundle b;
  try {
    const auto& m = doc.at("meta");
    b.meta.bins = m.at("bins").get<int>();
    b.meta.frames_failed = m.at("frames_failed").get<std::size_t>();
    b.meta.frames_scored = m.at("frames_scored").get<std::size_t>();
    b.meta.frames_total = m.at("frames_total").get<std::size_t>();
    b.meta.manifest_hash = m.at("manifest_hash").get<std::string>();
    b.meta.tau = m.at("tau").get<double>();
    b.meta.timestamp = m.at("timestamp").get<std::string>();
    b.meta.tool_version = m.at("tool_version").get<std::string>();
    b.include_scores = doc.at("include_scores").get<bool>();

    for (const auto& f : doc.at("frames")) {
      b.frames.push_back({f.at("dataset_id").get<std::string>(),
                          f.at("scene_id").get<std::string>(),
                          f.at("frame_id").get<std::string>(),
                          f.at("domain_tag").get<std::string>(),
                          f.at("mmcm").get<double>(),
                          f.at("mean_agreement").get<double>(),
                          f.at("mean_confidence").get<double>(),
                          opt_from(f.at("depth_entropy")),
                          opt_from(f.at("depth_mean")),
                          opt_from(f.at("discontinuity_ratio"))});
    }
    for (const auto& s : doc.at("scenes")) {
      b.scenes.push_back({s.at("dataset_id").get<std::string>(),
                          s.at("scene_id").get<std::string>(),
                          s.at("domain_tag").get<std::string>(),
                          s.at("frames_scored").get<std::size_t>(),
                          s.at("frames_failed").get<std::size_t>(),
                          opt_from(s.at("mean_mmcm"))});
    }
    for (const auto& d : doc.at("datasets")) {
      b.datasets.push_back({d.at("dataset_id").get<std::string>(),
                            d.at("domain_tag").get<std::string>(),
                            d.at("frames_scored").get<std::size_t>(),
                            d.at("frames_failed").get<std::size_t>(),
                            opt_from(d.at("mean_mmcm")),
                            opt_from(d.at("mean_of_scene_means"))});
    }
    for (const auto& g : doc.at("gaps")) {
      GapSection section;
      section.name = g.at("name").get<std::string>();
      section.level = g.at("level").get<std::string>();
      section.matrix.row_ids = g.at("row_ids").get<std::vector<std::string>>();
      section.matrix.col_ids = g.at("col_ids").get<std::vector<std::string>>();
      section.matrix.values = g.at("values").get<std::vector<double>>();
      section.row_ranking = ranking_from(g.at("row_ranking"));
      section.col_ranking = ranking_from(g.at("col_ranking"));
      b.gaps.push_back(std::move(section));
    }
    for (const auto& t : doc.at("trends")) {
      TrendSection section{t.at("metric").get<std::string>(),
                           t.at("level").get<std::string>(), {}};
      for (const auto& r : t.at("rows")) {
        TrendRow row{r.at("domain_tag").get<std::string>(),
                     r.at("n").get<std::size_t>(),
                     r.at("excluded").get<std::size_t>(),
                     {},
                     r.at("status").get<std::string>()};
        if (const auto& fit = r.at("fit"); !fit.is_null()) {
          row.fit = TrendFit{fit.at("slope").get<double>(),
                             fit.at("intercept").get<double>(),
                             fit.at("pearson_r").get<double>(),
                             fit.at("n").get<std::size_t>()};
        }
        section.rows.push_back(std::move(row));
      }
      b.trends.push_back(std::move(section));
    }
    for (const auto& f : doc.at("failures")) {
      b.failures.push_back({f.at("dataset_id").get<std::string>(),
                            f.at("scene_id").get<std::string>(),
                            f.at("frame_id").get<std::string>(),
                            f.at("code").get<std::string>(),
                            f.at("message").get<std::string>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaViolation, std::string("report JSON: ") + e.what());
  }
  return b;
}

void emit_json(const ReportBundle& bundle, const std::filesystem::path& path) {
  write_text(path, to_json(bundle).dump(2) + "\n");
}

std::vector<FrameRow> read_frame_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = csv::parse(buf.str());
  if (rows.empty()) fail(ErrorCode::ParseError, path.string() + " is empty");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows.front().size(); ++i) col[rows.front()[i]] = i;
  for (const char* required :
       {"dataset_id", "scene_id", "frame_id", "mmcm", "mean_agreement",
        "mean_confidence", "depth_entropy", "depth_mean", "discontinuity_ratio"}) {
    if (!col.contains(required)) {
      fail(ErrorCode::ParseError,
           path.string() + " lacks column " + std::string(required));
    }
  }

  std::vector<FrameRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows.front().size()) {
      fail(ErrorCode::ParseError,
           path.string() + " line " + std::to_string(r + 1) + " has " +
               std::to_string(row.size()) + " fields");
    }
    auto num = [&](const char* name) -> std::optional<double> {
      const std::string& s = row[col.at(name)];
      if (s.empty()) return std::nullopt;
      try {
        return std::stod(s);
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "bad number '" + s + "' in " + path.string());
      }
    };
    auto required = [&](const char* name) {
      auto v = num(name);
      if (!v) fail(ErrorCode::ParseError, std::string(name) + " is empty in " + path.string());
      return *v;
    };
    out.push_back({row[col.at("dataset_id")], row[col.at("scene_id")],
                   row[col.at("frame_id")], "", required("mmcm"),
                   required("mean_agreement"), required("mean_confidence"),
                   num("depth_entropy"), num("depth_mean"),
                   num("discontinuity_ratio")});
  }
  return out;
}

void render_heatmap(const GapMatrix& matrix, const std::filesystem::path& path,
                    std::string_view title) {
  write_text(path, svg::heatmap(matrix, title));
}

void render_scatter(std::span<const svg::Series> series,
                    std::string_view x_label, std::string_view y_label,
                    const std::filesystem::path& path, std::string_view title) {
  write_text(path, svg::scatter(series, x_label, y_label, title));
}

}  // namespace mmcm
