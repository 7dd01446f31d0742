#include "mmcm/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmcm/corpus.hpp"
#include "mmcm/error.hpp"
#include "mmcm/gap.hpp"
#include "mmcm/report.hpp"
#include "mmcm/synthgen.hpp"

namespace fs = std::filesystem;

namespace mmcm {
namespace {

// Configuration errors that map to exit 2; the exception carries the
// message already formatted.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SchemaViolation:
    case ErrorCode::DuplicateId:
    case ErrorCode::ModelCountMismatch:
    case ErrorCode::UnknownDataset:
    case ErrorCode::InvalidBinCount:
    case ErrorCode::InvalidTau:
    case ErrorCode::InvalidSpec:
    case ErrorCode::UnrealizableAgreement:
      return kExitUsage;
    default:
      return kExitData;
  }
}

struct Common {
  std::string manifest;
  std::string out;
  int bins = kDefaultBins;
  double tau = kDefaultTau;
  int workers = 0;  // 0: not given on the command line
  std::vector<std::string> datasets;
  std::vector<std::string> scenes;
  std::string scores_in;
};

int resolve_worker_flag(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("MMCM_WORKERS"); env && *env) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw UsageError("MMCM_WORKERS must be a positive integer, got '" +
                     std::string(env) + "'");
  }
  return resolve_workers(0);
}

Manifest open_manifest(const std::string& path) {
  try {
    return load_manifest(path);
  } catch (const Error& e) {
    throw UsageError(std::string("cannot load manifest: ") + e.what());
  }
}

void add_score_flags(CLI::App* sub, Common& c) {
  sub->add_option("--bins", c.bins, "Depth histogram bin count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--tau", c.tau, "Discontinuity threshold, fraction of depth range")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--workers", c.workers,
                  "Worker threads (falls back to MMCM_WORKERS)")
      ->default_str("hardware parallelism")
      ->check(CLI::Range(1, 4096));
}

struct RowSource {
  std::vector<FrameRow> rows;
  std::vector<FailureRow> failures;
  std::size_t frames_total = 0;
};

std::map<std::string, std::string> domain_tags(const Manifest& m) {
  std::map<std::string, std::string> tags;
  for (const auto& d : m.datasets) tags[d.dataset_id] = d.domain_tag;
  return tags;
}

// Frame rows either recomputed from the corpus or read back from a previous
// frame_scores.csv, restricted to the datasets and scenes of `m`.
RowSource obtain_rows(const Manifest& m, const Common& c) {
  RowSource src;
  src.frames_total = m.frame_count();
  if (c.scores_in.empty()) {
    const ScoreParams params{c.bins, c.tau, resolve_worker_flag(c.workers)};
    const CorpusScores scores = score_corpus(m, params);
    src.rows = frame_rows(scores);
    for (const auto& f : scores.failures) {
      src.failures.push_back({f.dataset_id, f.scene_id, f.frame_id,
                              std::string(to_string(f.code)), f.message});
    }
    return src;
  }

  std::vector<FrameRow> read;
  try {
    read = read_frame_scores_csv(c.scores_in);
  } catch (const Error& e) {
    throw UsageError(std::string("cannot read --scores-in: ") + e.what());
  }
  std::set<std::pair<std::string, std::string>> scenes;
  for (const auto& d : m.datasets) {
    for (const auto& s : d.scenes) scenes.emplace(d.dataset_id, s.scene_id);
  }
  const auto tags = domain_tags(m);
  for (auto& row : read) {
    if (!scenes.contains({row.dataset_id, row.scene_id})) continue;
    row.domain_tag = tags.at(row.dataset_id);
    src.rows.push_back(std::move(row));
  }
  if (src.rows.empty()) {
    fail(ErrorCode::EmptyGroup, "no rows of " + c.scores_in + " match the manifest");
  }
  return src;
}

RunMetadata run_metadata(const Common& c, const RowSource& src) {
  RunMetadata meta;
  meta.bins = c.bins;
  meta.tau = c.tau;
  meta.timestamp = utc_timestamp();
  meta.manifest_hash = file_sha256(c.manifest);
  meta.frames_total = src.frames_total;
  meta.frames_scored = src.rows.size();
  meta.frames_failed = src.failures.size();
  return meta;
}

void report_written(std::ostream& out, const std::vector<fs::path>& paths) {
  for (const auto& p : paths) out << "wrote " << p.string() << "\n";
}

void report_failures(std::ostream& err, const std::vector<FailureRow>& failures) {
  for (const auto& f : failures) {
    err << "failed " << f.dataset_id << "/" << f.scene_id << "/" << f.frame_id
        << ": " << f.message << "\n";
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += sep;
    s += parts[i];
  }
  return s;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const Common& c, std::ostream& out) {
  const Manifest m = open_manifest(c.manifest);
  const auto failures = validate_corpus(m, resolve_worker_flag(c.workers));
  for (const auto& f : failures) out << f.to_line() << "\n";
  if (failures.empty()) {
    out << "ok: " << m.frame_count() << " frames validated\n";
    return kExitOk;
  }
  return kExitData;
}

// ------------------------------------------------------------------- score

int cmd_score(const Common& c, std::ostream& out, std::ostream& err) {
  const Manifest m = filter_manifest(open_manifest(c.manifest), c.datasets, c.scenes);
  const ScoreParams params{c.bins, c.tau, resolve_worker_flag(c.workers)};
  const CorpusScores scores = score_corpus(m, params);

  RunMetadata meta;
  meta.bins = c.bins;
  meta.tau = c.tau;
  meta.timestamp = utc_timestamp();
  meta.manifest_hash = file_sha256(c.manifest);
  const ReportBundle bundle = bundle_from_scores(m, scores, meta);

  auto written = emit_csv(bundle, c.out);
  emit_json(bundle, fs::path(c.out) / "run.json");
  written.push_back(fs::path(c.out) / "run.json");
  report_failures(err, bundle.failures);
  report_written(out, written);
  out << "scored " << bundle.meta.frames_scored << " of "
      << bundle.meta.frames_total << " frames, " << bundle.meta.frames_failed
      << " failed\n";
  return kExitOk;
}

// --------------------------------------------------------------------- gap

struct GapArgs {
  std::string level = "scene";
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  bool svg = false;
  std::string name;
};

std::vector<ScoreSet> groups_for(const Manifest& m, const std::vector<FrameRow>& rows,
                                 const std::vector<std::string>& dataset_ids,
                                 const std::string& level, bool qualify,
                                 std::ostream& err) {
  std::vector<ScoreSet> sets;
  auto collect = [&](const std::string& ds, const std::string* scene) {
    std::vector<FrameScore> scores;
    for (const auto& r : rows) {
      if (r.dataset_id == ds && (!scene || r.scene_id == *scene)) {
        scores.push_back({r.frame_id, r.mmcm});
      }
    }
    return scores;
  };
  for (const auto& ds : dataset_ids) {
    const DatasetEntry* d = m.find_dataset(ds);
    if (level == "dataset") {
      auto scores = collect(ds, nullptr);
      if (scores.empty()) {
        err << "skipping dataset " << ds << ": no scored frames\n";
        continue;
      }
      sets.push_back(group_mean(ds, std::move(scores)));
      continue;
    }
    for (const auto& s : d->scenes) {
      auto scores = collect(ds, &s.scene_id);
      const std::string id = qualify ? ds + "/" + s.scene_id : s.scene_id;
      if (scores.empty()) {
        err << "skipping scene " << id << ": no scored frames\n";
        continue;
      }
      sets.push_back(group_mean(id, std::move(scores)));
    }
  }
  if (sets.empty()) {
    fail(ErrorCode::EmptyGroup, "no scored groups among " + join(dataset_ids, ", "));
  }
  return sets;
}

int cmd_gap(const Common& c, const GapArgs& g, std::ostream& out, std::ostream& err) {
  const Manifest full = open_manifest(c.manifest);
  std::vector<std::string> wanted = g.rows;
  for (const auto& id : g.cols) {
    if (std::find(wanted.begin(), wanted.end(), id) == wanted.end()) wanted.push_back(id);
  }
  const Manifest m = filter_manifest(full, wanted, {});

  const RowSource src = obtain_rows(m, c);
  // Scene ids are only unique within a dataset.
  const bool qualify = wanted.size() > 1;
  const auto row_sets = groups_for(m, src.rows, g.rows, g.level, qualify, err);
  const auto col_sets = groups_for(m, src.rows, g.cols, g.level, qualify, err);

  std::string name = g.name;
  if (name.empty()) {
    name = g.level + "_" + join(g.rows, "+");
    if (g.rows != g.cols) name += "_vs_" + join(g.cols, "+");
  }
  ReportBundle bundle;
  bundle.meta = run_metadata(c, src);
  bundle.include_scores = false;
  bundle.failures = src.failures;
  bundle.gaps.push_back(make_gap_section(name, g.level, gap_matrix(row_sets, col_sets)));

  auto written = emit_csv(bundle, c.out);
  const auto json_path = fs::path(c.out) / ("gap_" + file_safe(name) + ".json");
  emit_json(bundle, json_path);
  written.push_back(json_path);
  if (g.svg) {
    const auto svg_path = fs::path(c.out) / ("gap_matrix_" + file_safe(name) + ".svg");
    render_heatmap(bundle.gaps.front().matrix, svg_path,
                   "Relative perceptual gap: " + name);
    written.push_back(svg_path);
  }
  report_failures(err, bundle.failures);
  report_written(out, written);
  return kExitOk;
}

// ------------------------------------------------------------------- trend

struct TrendArgs {
  std::string x;
  std::string level = "frame";
  bool svg = false;
};

std::optional<double> metric_of(const FrameRow& row, const std::string& metric) {
  if (metric == "depth_entropy") return row.depth_entropy;
  if (metric == "depth_mean") return row.depth_mean;
  return row.discontinuity_ratio;
}

int cmd_trend(const Common& c, const TrendArgs& t, std::ostream& out, std::ostream& err) {
  const Manifest m = filter_manifest(open_manifest(c.manifest), c.datasets, c.scenes);
  const RowSource src = obtain_rows(m, c);

  std::vector<std::string> tags;
  for (const auto& d : m.datasets) {
    if (std::find(tags.begin(), tags.end(), d.domain_tag) == tags.end()) {
      tags.push_back(d.domain_tag);
    }
  }

  TrendSection section{t.x, t.level, {}};
  std::vector<svg::Series> series;
  for (const auto& tag : tags) {
    std::vector<Point2> points;
    std::size_t excluded = 0;
    if (t.level == "frame") {
      for (const auto& r : src.rows) {
        if (r.domain_tag != tag) continue;
        if (const auto x = metric_of(r, t.x)) {
          points.push_back({*x, r.mmcm});
        } else {
          ++excluded;
        }
      }
    } else {
      for (const auto& d : m.datasets) {
        if (d.domain_tag != tag) continue;
        for (const auto& s : d.scenes) {
          double sx = 0.0;
          double sy = 0.0;
          std::size_t n = 0;
          for (const auto& r : src.rows) {
            if (r.dataset_id != d.dataset_id || r.scene_id != s.scene_id) continue;
            if (const auto x = metric_of(r, t.x)) {
              sx += *x;
              sy += r.mmcm;
              ++n;
            } else {
              ++excluded;
            }
          }
          if (n > 0) {
            points.push_back({sx / static_cast<double>(n), sy / static_cast<double>(n)});
          }
        }
      }
    }

    TrendRow row{tag, points.size(), excluded, {}, "ok"};
    try {
      row.fit = trend_fit(points);
    } catch (const Error& e) {
      row.status = std::string(to_string(e.code()));
      err << "no trend for " << tag << ": " << e.what() << "\n";
    }
    if (!points.empty()) series.push_back({tag, points, row.fit});
    section.rows.push_back(std::move(row));
  }

  ReportBundle bundle;
  bundle.meta = run_metadata(c, src);
  bundle.include_scores = false;
  bundle.failures = src.failures;
  bundle.trends.push_back(section);

  auto written = emit_csv(bundle, c.out);
  const auto json_path = fs::path(c.out) / ("trend_" + file_safe(t.x) + ".json");
  emit_json(bundle, json_path);
  written.push_back(json_path);
  if (t.svg) {
    const auto svg_path = fs::path(c.out) / ("trend_" + file_safe(t.x) + ".svg");
    render_scatter(series, t.x, "mmcm", svg_path, "MMCM vs. " + t.x);
    written.push_back(svg_path);
  }
  report_failures(err, bundle.failures);
  report_written(out, written);
  return kExitOk;
}

// ------------------------------------------------------------------- synth

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              std::ostream& out) {
  SynthSpec spec;
  try {
    spec = load_synth_spec(spec_path);
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("invalid spec: ") + e.what());
  }
  const Manifest m = generate(spec, out_dir);
  out << "generated " << m.frame_count() << " frames in " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Scene complexity (multi-model consensus) and domain gap analysis"};
  app.name("mmcm");
  app.require_subcommand(1);

  Common c;
  GapArgs g;
  TrendArgs t;
  std::string spec_path;

  auto* validate = app.add_subcommand("validate", "Check every raster referenced by a manifest");
  validate->add_option("--manifest", c.manifest, "Corpus manifest.json")->required();
  validate->add_option("--workers", c.workers, "Worker threads (falls back to MMCM_WORKERS)")
      ->default_str("hardware parallelism")
      ->check(CLI::Range(1, 4096));

  auto* score = app.add_subcommand("score", "Score frames, write per-frame and per-scene tables");
  score->add_option("--manifest", c.manifest, "Corpus manifest.json")->required();
  score->add_option("--out", c.out, "Output directory")->required();
  add_score_flags(score, c);
  score->add_option("--dataset", c.datasets, "Only these dataset ids");
  score->add_option("--scene", c.scenes, "Only these scene ids");

  auto* gap = app.add_subcommand("gap", "Relative perceptual gap matrix and rankings");
  gap->add_option("--manifest", c.manifest, "Corpus manifest.json")->required();
  gap->add_option("--level", g.level, "Grouping level")
      ->capture_default_str()
      ->check(CLI::IsMember({"scene", "dataset"}));
  gap->add_option("--rows", g.rows, "Dataset ids for matrix rows")->required();
  gap->add_option("--cols", g.cols, "Dataset ids for matrix columns")->required();
  gap->add_option("--out", c.out, "Output directory")->required();
  gap->add_flag("--svg", g.svg, "Also render an SVG heatmap");
  gap->add_option("--name", g.name, "Output name (default derived from level and ids)");
  gap->add_option("--scores-in", c.scores_in, "Reuse a frame_scores.csv instead of rescoring");
  add_score_flags(gap, c);

  auto* trend = app.add_subcommand("trend", "Per-domain linear fit of MMCM against a depth metric");
  trend->add_option("--manifest", c.manifest, "Corpus manifest.json")->required();
  trend->add_option("--x", t.x, "Depth metric on the x axis")
      ->required()
      ->check(CLI::IsMember({"depth_entropy", "depth_mean", "discontinuity_ratio"}));
  trend->add_option("--out", c.out, "Output directory")->required();
  trend->add_flag("--svg", t.svg, "Also render an SVG scatter plot");
  trend->add_option("--level", t.level, "Point level")
      ->capture_default_str()
      ->check(CLI::IsMember({"frame", "scene"}));
  trend->add_option("--scores-in", c.scores_in, "Reuse a frame_scores.csv instead of rescoring");
  trend->add_option("--dataset", c.datasets, "Only these dataset ids");
  trend->add_option("--scene", c.scenes, "Only these scene ids");
  add_score_flags(trend, c);

  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with known scores");
  synth->add_option("--spec", spec_path, "Generator spec (JSON)")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(c, out);
    if (score->parsed()) return cmd_score(c, out, err);
    if (gap->parsed()) return cmd_gap(c, g, out, err);
    if (trend->parsed()) return cmd_trend(c, t, out, err);
    if (synth->parsed()) return cmd_synth(spec_path, synth_out, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace mmcm
