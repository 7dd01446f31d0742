#include "mmcm/corpus.hpp"

#include <omp.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

namespace mmcm {
namespace {

using nlohmann::json;

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) {
    fail(ErrorCode::SchemaViolation, where + " is not an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    fail(ErrorCode::SchemaViolation,
         where + " is missing \"" + std::string(key) + "\"");
  }
  return *it;
}

std::string string_member(const json& obj, const char* key,
                          const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_string()) {
    fail(ErrorCode::SchemaViolation,
         where + ".\"" + std::string(key) + "\" must be a string");
  }
  std::string s = v.get<std::string>();
  if (s.empty()) {
    fail(ErrorCode::SchemaViolation,
         where + ".\"" + std::string(key) + "\" must not be empty");
  }
  return s;
}

const json& array_member(const json& obj, const char* key,
                         const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_array()) {
    fail(ErrorCode::SchemaViolation,
         where + ".\"" + std::string(key) + "\" must be an array");
  }
  return v;
}

void insert_unique(std::set<std::string>& seen, const std::string& id,
                   const std::string& what) {
  if (!seen.insert(id).second) {
    fail(ErrorCode::DuplicateId, "duplicate " + what + " '" + id + "'");
  }
}

FrameEntry parse_frame(const json& f, std::size_t n_models,
                       const std::string& where) {
  FrameEntry frame;
  frame.frame_id = string_member(f, "frame_id", where);
  const std::string fwhere = where + "[" + frame.frame_id + "]";
  const json& preds = array_member(f, "predictions", fwhere);
  if (preds.size() != n_models) {
    fail(ErrorCode::ModelCountMismatch,
         "frame '" + frame.frame_id + "' lists " +
             std::to_string(preds.size()) + " prediction(s) for " +
             std::to_string(n_models) + " model(s)");
  }
  for (const auto& p : preds) {
    frame.predictions.push_back({string_member(p, "labels", fwhere),
                                 string_member(p, "confidence", fwhere)});
  }
  if (f.contains("depth") && !f.at("depth").is_null()) {
    frame.depth = string_member(f, "depth", fwhere);
  }
  return frame;
}

}  // namespace

std::filesystem::path Manifest::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

std::size_t Manifest::frame_count() const {
  std::size_t n = 0;
  for (const auto& d : datasets)
    for (const auto& s : d.scenes) n += s.frames.size();
  return n;
}

const DatasetEntry* Manifest::find_dataset(std::string_view id) const {
  for (const auto& d : datasets)
    if (d.dataset_id == id) return &d;
  return nullptr;
}

std::vector<FrameRef> frame_refs(const Manifest& manifest) {
  std::vector<FrameRef> refs;
  refs.reserve(manifest.frame_count());
  for (std::size_t d = 0; d < manifest.datasets.size(); ++d) {
    const auto& scenes = manifest.datasets[d].scenes;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
      for (std::size_t f = 0; f < scenes[s].frames.size(); ++f) {
        refs.push_back({d, s, f});
      }
    }
  }
  return refs;
}

Manifest parse_manifest(std::string_view json_text,
                        const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, e.what());
  }

  Manifest m;
  m.base_dir = base_dir;
  m.version = string_member(doc, "version", "manifest");
  if (m.version != kManifestVersion) {
    fail(ErrorCode::SchemaViolation,
         "unsupported manifest version '" + m.version + "'");
  }

  std::set<std::string> model_names;
  for (const auto& name : array_member(doc, "models", "manifest")) {
    if (!name.is_string() || name.get<std::string>().empty()) {
      fail(ErrorCode::SchemaViolation, "model names must be non-empty strings");
    }
    insert_unique(model_names, name.get<std::string>(), "model");
    m.models.push_back(name.get<std::string>());
  }
  if (m.models.size() < 2) {
    fail(ErrorCode::SchemaViolation, "manifest must declare at least 2 models");
  }

  std::set<std::string> dataset_ids;
  for (const auto& d : array_member(doc, "datasets", "manifest")) {
    DatasetEntry ds;
    ds.dataset_id = string_member(d, "dataset_id", "dataset");
    insert_unique(dataset_ids, ds.dataset_id, "dataset_id");
    const std::string dwhere = "dataset[" + ds.dataset_id + "]";
    const json& tag = member(d, "domain_tag", dwhere);
    if (!tag.is_string()) {
      fail(ErrorCode::SchemaViolation, dwhere + ".domain_tag must be a string");
    }
    ds.domain_tag = tag.get<std::string>();

    std::set<std::string> scene_ids;
    for (const auto& s : array_member(d, "scenes", dwhere)) {
      SceneEntry scene;
      scene.scene_id = string_member(s, "scene_id", dwhere + ".scene");
      insert_unique(scene_ids, scene.scene_id,
                    "scene_id in dataset '" + ds.dataset_id + "'");
      const std::string swhere = dwhere + ".scene[" + scene.scene_id + "]";
      std::set<std::string> frame_ids;
      for (const auto& f : array_member(s, "frames", swhere)) {
        FrameEntry frame = parse_frame(f, m.models.size(), swhere + ".frame");
        insert_unique(frame_ids, frame.frame_id,
                      "frame_id in scene '" + scene.scene_id + "'");
        scene.frames.push_back(std::move(frame));
      }
      if (scene.frames.empty()) {
        fail(ErrorCode::SchemaViolation, swhere + " has no frames");
      }
      ds.scenes.push_back(std::move(scene));
    }
    m.datasets.push_back(std::move(ds));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::IoFailure, "cannot open manifest " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

std::string manifest_to_json(const Manifest& m) {
  json doc;
  doc["version"] = m.version;
  doc["models"] = m.models;
  doc["datasets"] = json::array();
  for (const auto& d : m.datasets) {
    json jd{{"dataset_id", d.dataset_id},
            {"domain_tag", d.domain_tag},
            {"scenes", json::array()}};
    for (const auto& s : d.scenes) {
      json js{{"scene_id", s.scene_id}, {"frames", json::array()}};
      for (const auto& f : s.frames) {
        json jf{{"frame_id", f.frame_id}, {"predictions", json::array()}};
        for (const auto& p : f.predictions) {
          jf["predictions"].push_back(
              {{"labels", p.labels}, {"confidence", p.confidence}});
        }
        if (f.depth) jf["depth"] = *f.depth;
        js["frames"].push_back(std::move(jf));
      }
      jd["scenes"].push_back(std::move(js));
    }
    doc["datasets"].push_back(std::move(jd));
  }
  return doc.dump(2) + "\n";
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << manifest_to_json(manifest);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write manifest " + path.string());
  }
}

Manifest filter_manifest(const Manifest& manifest,
                         std::span<const std::string> datasets,
                         std::span<const std::string> scenes) {
  for (const auto& id : datasets) {
    if (!manifest.find_dataset(id)) {
      fail(ErrorCode::UnknownDataset, "no dataset '" + id + "' in manifest");
    }
  }
  const std::set<std::string> keep_ds(datasets.begin(), datasets.end());
  const std::set<std::string> keep_sc(scenes.begin(), scenes.end());
  Manifest out = manifest;
  out.datasets.clear();
  for (const auto& d : manifest.datasets) {
    if (!keep_ds.empty() && !keep_ds.contains(d.dataset_id)) continue;
    DatasetEntry copy = d;
    if (!keep_sc.empty()) {
      std::erase_if(copy.scenes, [&](const SceneEntry& s) {
        return !keep_sc.contains(s.scene_id);
      });
    }
    out.datasets.push_back(std::move(copy));
  }
  return out;
}

std::string ValidationFailure::to_line() const {
  std::ostringstream line;
  line << to_string(code) << " dataset=" << dataset_id << " scene=" << scene_id
       << " frame=" << frame_id << " model=" << model << " path=" << path
       << " : " << message;
  return line.str();
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

struct Shape {
  std::uint32_t width;
  std::uint32_t height;
};

// Validates one frame; appends failures in model order (labels, confidence),
// then depth.
std::vector<ValidationFailure> validate_frame(const Manifest& m,
                                             const DatasetEntry& ds,
                                             const SceneEntry& scene,
                                             const FrameEntry& frame) {
  std::vector<ValidationFailure> out;
  std::optional<Shape> ref;
  auto check = [&](const std::string& model, const std::string& path,
                   RasterRole role) {
    ValidationFailure vf{ds.dataset_id, scene.scene_id, frame.frame_id,
                         model,         path,           ErrorCode::IoFailure,
                         {}};
    const auto resolved = m.resolve(path);
    if (!std::filesystem::exists(resolved)) {
      vf.message = "file not found";
      out.push_back(std::move(vf));
      return;
    }
    try {
      const Raster r = read_raster(resolved, role);
      const Shape s = std::visit(
          [](const auto& map) { return Shape{map.width, map.height}; }, r);
      if (!ref) {
        ref = s;
      } else if (s.width != ref->width || s.height != ref->height) {
        vf.code = ErrorCode::DimensionMismatch;
        vf.message = std::to_string(s.width) + "x" + std::to_string(s.height) +
                     " differs from frame size " + std::to_string(ref->width) +
                     "x" + std::to_string(ref->height);
        out.push_back(std::move(vf));
      }
    } catch (const Error& e) {
      vf.code = e.code();
      vf.message = e.what();
      out.push_back(std::move(vf));
    }
  };
  for (std::size_t i = 0; i < frame.predictions.size(); ++i) {
    check(m.models[i], frame.predictions[i].labels, RasterRole::kLabels);
    check(m.models[i], frame.predictions[i].confidence, RasterRole::kConfidence);
  }
  if (frame.depth) check("depth", *frame.depth, RasterRole::kDepth);
  return out;
}

}  // namespace

std::vector<ValidationFailure> validate_corpus(const Manifest& manifest,
                                               int workers) {
  const auto refs = frame_refs(manifest);
  std::vector<std::vector<ValidationFailure>> per_frame(refs.size());
  const int threads = resolve_workers(workers);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(refs.size()); ++i) {
    const auto& ref = refs[static_cast<std::size_t>(i)];
    const auto& ds = manifest.datasets[ref.dataset];
    const auto& scene = ds.scenes[ref.scene];
    per_frame[static_cast<std::size_t>(i)] =
        validate_frame(manifest, ds, scene, scene.frames[ref.frame]);
  }
  std::vector<ValidationFailure> all;
  for (auto& v : per_frame) {
    for (auto& f : v) all.push_back(std::move(f));
  }
  return all;
}

void load_frame_into(const Manifest& manifest, const FrameEntry& entry,
                     EnsembleFrame& frame) {
  frame.frame_id = entry.frame_id;
  frame.predictions.resize(entry.predictions.size());
  for (std::size_t i = 0; i < entry.predictions.size(); ++i) {
    const auto& p = entry.predictions[i];
    read_into(manifest.resolve(p.labels), frame.predictions[i].labels);
    read_into(manifest.resolve(p.confidence), frame.predictions[i].confidence);
  }
  if (entry.depth) {
    if (!frame.depth) frame.depth.emplace();
    read_into(manifest.resolve(*entry.depth), *frame.depth);
  } else {
    frame.depth.reset();
  }
  frame.check_shapes();
}

EnsembleFrame load_frame(const Manifest& manifest, const FrameEntry& entry) {
  EnsembleFrame frame;
  load_frame_into(manifest, entry, frame);
  return frame;
}

FrameScores score_frame(const EnsembleFrame& frame, int bins, double tau) {
  FrameScores scores;
  scores.frame_id = frame.frame_id;
  scores.consensus = consensus(frame);
  if (frame.depth) {
    scores.structural = structural_metrics(*frame.depth, bins, tau, frame.frame_id);
  }
  return scores;
}

CorpusScores score_corpus(const Manifest& manifest, const ScoreParams& params) {
  // Parameter errors are run-level, not per-frame.
  if (params.bins < 1) {
    fail(ErrorCode::InvalidBinCount, "bins = " + std::to_string(params.bins));
  }
  if (!(params.tau > 0.0)) {
    fail(ErrorCode::InvalidTau, "tau = " + std::to_string(params.tau));
  }

  const auto refs = frame_refs(manifest);
  const auto n = refs.size();
  std::vector<std::optional<FrameScores>> results(n);
  std::vector<std::optional<FrameFailure>> failures(n);
  const int threads = resolve_workers(params.workers);

#pragma omp parallel num_threads(threads)
  {
    EnsembleFrame scratch;
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const auto& ref = refs[idx];
      const auto& ds = manifest.datasets[ref.dataset];
      const auto& scene = ds.scenes[ref.scene];
      const auto& entry = scene.frames[ref.frame];
      try {
        load_frame_into(manifest, entry, scratch);
        results[idx] = score_frame(scratch, params.bins, params.tau);
      } catch (const Error& e) {
        failures[idx] = FrameFailure{ds.dataset_id, scene.scene_id,
                                     entry.frame_id, e.code(), e.what()};
      } catch (const std::exception& e) {
        failures[idx] = FrameFailure{ds.dataset_id, scene.scene_id,
                                     entry.frame_id, ErrorCode::IoFailure,
                                     e.what()};
      }
    }
  }

  CorpusScores out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ref = refs[i];
    const auto& ds = manifest.datasets[ref.dataset];
    if (results[i]) {
      out.frames.push_back({ds.dataset_id, ds.scenes[ref.scene].scene_id,
                            ds.domain_tag, std::move(*results[i])});
    } else {
      out.failures.push_back(std::move(*failures[i]));
    }
  }
  if (out.frames.empty()) {
    std::string what = "no frame could be scored";
    if (!out.failures.empty()) what += "; first failure: " + out.failures.front().message;
    fail(ErrorCode::EmptyGroup, what);
  }
  return out;
}

namespace {

using SceneKey = std::pair<std::string, std::string>;

}  // namespace

std::vector<SceneSummary> summarize_scenes(const Manifest& manifest,
                                           const CorpusScores& scores) {
  std::map<SceneKey, std::vector<FrameScore>> scored;
  std::map<SceneKey, std::size_t> failed;
  for (const auto& f : scores.frames) {
    scored[{f.dataset_id, f.scene_id}].push_back(
        {f.scores.frame_id, f.scores.consensus.mmcm});
  }
  for (const auto& f : scores.failures) ++failed[{f.dataset_id, f.scene_id}];

  std::vector<SceneSummary> out;
  for (const auto& d : manifest.datasets) {
    for (const auto& s : d.scenes) {
      SceneSummary sum{d.dataset_id, s.scene_id, d.domain_tag, 0, 0, {}};
      const SceneKey key{d.dataset_id, s.scene_id};
      if (auto it = failed.find(key); it != failed.end()) sum.frames_failed = it->second;
      if (auto it = scored.find(key); it != scored.end()) {
        sum.frames_scored = it->second.size();
        sum.scores = group_mean(s.scene_id, it->second);
      }
      out.push_back(std::move(sum));
    }
  }
  return out;
}

std::vector<DatasetSummary> summarize_datasets(const Manifest& manifest,
                                               const CorpusScores& scores) {
  const auto scenes = summarize_scenes(manifest, scores);
  std::vector<DatasetSummary> out;
  for (const auto& d : manifest.datasets) {
    DatasetSummary sum{d.dataset_id, d.domain_tag, 0, 0, {}, {}};
    std::vector<FrameScore> all;
    for (const auto& f : scores.frames) {
      if (f.dataset_id == d.dataset_id) {
        all.push_back({f.scores.frame_id, f.scores.consensus.mmcm});
      }
    }
    double scene_total = 0.0;
    std::size_t scene_count = 0;
    for (const auto& s : scenes) {
      if (s.dataset_id != d.dataset_id) continue;
      sum.frames_failed += s.frames_failed;
      if (s.scores) {
        scene_total += s.scores->mean_mmcm;
        ++scene_count;
      }
    }
    sum.frames_scored = all.size();
    if (!all.empty()) sum.scores = group_mean(d.dataset_id, std::move(all));
    if (scene_count > 0) {
      sum.mean_of_scene_means = scene_total / static_cast<double>(scene_count);
    }
    out.push_back(std::move(sum));
  }
  return out;
}

}  // namespace mmcm
