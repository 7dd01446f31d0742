#include "mmcm/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "mmcm/error.hpp"

namespace mmcm {
namespace {

using nlohmann::json;

std::size_t agreeing_pixels(const SynthSpec& spec) {
  const double n = static_cast<double>(spec.width) * spec.height;
  return static_cast<std::size_t>(std::llround(spec.target_pair_agreement * n));
}

std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03d", prefix, i);
  return buf;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
}

}  // namespace

std::string_view to_string(DepthPattern pattern) {
  switch (pattern) {
    case DepthPattern::kNone: return "none";
    case DepthPattern::kConstant: return "constant";
    case DepthPattern::kStepEdge: return "step-edge";
    case DepthPattern::kGradientRamp: return "gradient-ramp";
    case DepthPattern::kUniformRandom: return "uniform-random";
  }
  return "none";
}

DepthPattern parse_depth_pattern(std::string_view name) {
  for (auto p : {DepthPattern::kNone, DepthPattern::kConstant,
                 DepthPattern::kStepEdge, DepthPattern::kGradientRamp,
                 DepthPattern::kUniformRandom}) {
    if (to_string(p) == name) return p;
  }
  fail(ErrorCode::InvalidSpec, "unknown depth_pattern '" + std::string(name) + "'");
}

double SynthSpec::confidence_of(int model) const {
  return confidence.size() == 1 ? confidence.front()
                                : confidence[static_cast<std::size_t>(model)];
}

void SynthSpec::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidSpec, what); };
  if (width < 1 || height < 1) bad("width and height must be >= 1");
  if (n_models < 2) bad("n_models must be >= 2");
  if (n_classes < 1 || n_classes > 65536) bad("n_classes must be in [1, 65536]");
  if (scenes < 1 || frames_per_scene < 1) bad("scenes and frames_per_scene must be >= 1");
  if (dataset_id.empty()) bad("dataset_id must not be empty");
  if (confidence.size() != 1 &&
      confidence.size() != static_cast<std::size_t>(n_models)) {
    bad("confidence_value must be one number or one per model");
  }
  for (double c : confidence) {
    if (!(c >= 0.0 && c <= 1.0)) bad("confidence values must lie in [0,1]");
  }
  if (!std::isfinite(depth_value)) bad("depth_value must be finite");
  if ((depth_pattern == DepthPattern::kStepEdge ||
       depth_pattern == DepthPattern::kGradientRamp) &&
      width < 2) {
    bad(std::string(to_string(depth_pattern)) + " needs width >= 2");
  }
  if (!(target_pair_agreement >= 0.0 && target_pair_agreement <= 1.0)) {
    fail(ErrorCode::UnrealizableAgreement, "target_pair_agreement outside [0,1]");
  }
  const std::size_t pixels = std::size_t{width} * height;
  if (agreeing_pixels(*this) < pixels && n_classes < n_models) {
    fail(ErrorCode::UnrealizableAgreement,
         "pairwise disagreement for " + std::to_string(n_models) +
             " models needs at least that many classes");
  }
}

SynthSpec parse_synth_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::InvalidSpec, "spec must be a JSON object");

  SynthSpec spec;
  try {
    spec.width = doc.value("width", spec.width);
    spec.height = doc.value("height", spec.height);
    spec.n_models = doc.value("n_models", spec.n_models);
    spec.n_classes = doc.value("n_classes", spec.n_classes);
    spec.target_pair_agreement =
        doc.value("target_pair_agreement", spec.target_pair_agreement);
    if (doc.contains("confidence_value")) {
      const auto& c = doc.at("confidence_value");
      spec.confidence = c.is_array() ? c.get<std::vector<double>>()
                                     : std::vector<double>{c.get<double>()};
    }
    spec.depth_pattern = parse_depth_pattern(
        doc.value("depth_pattern", std::string(to_string(spec.depth_pattern))));
    spec.depth_value = doc.value("depth_value", spec.depth_value);
    spec.seed = doc.value("seed", spec.seed);
    spec.scenes = doc.value("scenes", spec.scenes);
    spec.frames_per_scene = doc.value("frames_per_scene", spec.frames_per_scene);
    spec.dataset_id = doc.value("dataset_id", spec.dataset_id);
    spec.domain_tag = doc.value("domain_tag", spec.domain_tag);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidSpec, e.what());
  }
  spec.validate();
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_synth_spec(buf.str());
}

SynthExpectation expected_values(const SynthSpec& spec, int bins, double tau) {
  spec.validate();
  SynthExpectation e;
  const std::size_t pixels = std::size_t{spec.width} * spec.height;
  e.agreeing_pixels = agreeing_pixels(spec);
  e.pair_agreement_fraction =
      static_cast<double>(e.agreeing_pixels) / static_cast<double>(pixels);

  const int n = spec.n_models;
  double pair_weight = 0.0;
  double conf_total = 0.0;
  for (int i = 0; i < n; ++i) {
    conf_total += spec.confidence_of(i);
    for (int j = i + 1; j < n; ++j) {
      pair_weight += std::sqrt(spec.confidence_of(i) * spec.confidence_of(j));
    }
  }
  e.mean_agreement =
      e.pair_agreement_fraction * pair_weight / (n * (n - 1) / 2.0);
  e.mean_confidence = conf_total / n;
  e.mmcm = e.mean_agreement * std::sqrt(e.mean_confidence);

  const double w = spec.width;
  switch (spec.depth_pattern) {
    case DepthPattern::kNone:
    case DepthPattern::kUniformRandom:
      break;
    case DepthPattern::kConstant:
      e.depth_entropy = 0.0;
      e.discontinuity_ratio = 0.0;
      e.depth_mean = spec.depth_value;
      break;
    case DepthPattern::kStepEdge: {
      // Left floor(w/2) columns are 0, the rest 1. Only the two columns
      // beside the step see a nonzero response, |Gx| = 1 + 2 + 1 = 4.
      const double zeros = std::floor(w / 2.0);
      e.depth_entropy = bins >= 2 ? binary_entropy(zeros / w) : 0.0;
      e.discontinuity_ratio = 4.0 > tau ? 2.0 / w : 0.0;
      e.depth_mean = (w - zeros) / w;
      break;
    }
    case DepthPattern::kGradientRamp: {
      // D(x, y) = x. Border columns see |Gx| = 4, interior columns 8.
      const double range = w - 1.0;
      const double threshold = tau * range;
      double above = 0.0;
      if (spec.width == 2) {
        above = 4.0 > threshold ? 2.0 : 0.0;
      } else {
        above = (4.0 > threshold ? 2.0 : 0.0) + (8.0 > threshold ? w - 2.0 : 0.0);
      }
      e.discontinuity_ratio = above / w;
      // Each column lands in its own bin while w <= bins.
      if (spec.width <= static_cast<std::uint32_t>(bins)) e.depth_entropy = std::log(w);
      e.depth_mean = range / 2.0;
      break;
    }
  }
  return e;
}

std::uint64_t SynthRng::below(std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

double SynthRng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

EnsembleFrame synthesize_frame(const SynthSpec& spec, SynthRng& rng,
                               std::string frame_id) {
  const std::uint32_t w = spec.width;
  const std::uint32_t h = spec.height;
  const std::size_t pixels = std::size_t{w} * h;
  const auto k = static_cast<std::uint64_t>(spec.n_classes);

  std::vector<std::uint16_t> base(pixels);
  for (auto& label : base) label = static_cast<std::uint16_t>(rng.below(k));

  const std::size_t disagree = pixels - agreeing_pixels(spec);
  std::vector<std::size_t> order(pixels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < disagree; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pixels - i));
    std::swap(order[i], order[j]);
  }

  EnsembleFrame frame;
  frame.frame_id = std::move(frame_id);
  for (int m = 0; m < spec.n_models; ++m) {
    Prediction p;
    p.labels = LabelMap{w, h, base};
    for (std::size_t i = 0; i < disagree; ++i) {
      const std::size_t px = order[i];
      p.labels.labels[px] = static_cast<std::uint16_t>(
          (std::uint64_t{base[px]} + static_cast<std::uint64_t>(m)) % k);
    }
    p.confidence = ConfidenceMap{w, h, std::vector<double>(pixels, spec.confidence_of(m))};
    p.confidence.storage = narrowest_exact_storage(std::span(&p.confidence.values[0], 1));
    frame.predictions.push_back(std::move(p));
  }

  if (spec.depth_pattern != DepthPattern::kNone) {
    DepthMap depth{w, h, std::vector<double>(pixels, 0.0)};
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        double& v = depth.values[std::size_t{y} * w + x];
        switch (spec.depth_pattern) {
          case DepthPattern::kConstant: v = spec.depth_value; break;
          case DepthPattern::kStepEdge: v = x < w / 2 ? 0.0 : 1.0; break;
          case DepthPattern::kGradientRamp: v = x; break;
          case DepthPattern::kUniformRandom:
            v = static_cast<float>(rng.unit());
            break;
          case DepthPattern::kNone: break;
        }
      }
    }
    depth.storage = narrowest_exact_storage(depth.values);
    frame.depth = std::move(depth);
  }
  return frame;
}

Manifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + out_dir.string());

  Manifest m;
  m.base_dir = out_dir;
  for (int i = 0; i < spec.n_models; ++i) m.models.push_back(numbered("model_", i));
  DatasetEntry ds{spec.dataset_id, spec.domain_tag, {}};

  SynthRng rng(spec.seed);
  for (int s = 0; s < spec.scenes; ++s) {
    SceneEntry scene{numbered("scene_", s), {}};
    std::filesystem::create_directories(out_dir / scene.scene_id, ec);
    if (ec) fail(ErrorCode::IoFailure, "cannot create scene directory");
    for (int f = 0; f < spec.frames_per_scene; ++f) {
      const std::string fid = numbered("frame_", f);
      const EnsembleFrame frame = synthesize_frame(spec, rng, fid);
      FrameEntry entry{fid, {}, {}};
      const std::string stem = scene.scene_id + "/" + fid;
      for (int mi = 0; mi < spec.n_models; ++mi) {
        const auto& p = frame.predictions[static_cast<std::size_t>(mi)];
        PredictionPaths paths{stem + "." + m.models[static_cast<std::size_t>(mi)] + ".labels.mmc1",
                              stem + "." + m.models[static_cast<std::size_t>(mi)] + ".conf.mmc1"};
        write_raster(p.labels, out_dir / paths.labels);
        write_raster(p.confidence, out_dir / paths.confidence);
        entry.predictions.push_back(std::move(paths));
      }
      if (frame.depth) {
        entry.depth = stem + ".depth.mmc1";
        write_raster(*frame.depth, out_dir / *entry.depth);
      }
      scene.frames.push_back(std::move(entry));
    }
    ds.scenes.push_back(std::move(scene));
  }
  m.datasets.push_back(std::move(ds));
  save_manifest(m, out_dir / "manifest.json");

  const SynthExpectation e = expected_values(spec);
  json doc;
  doc["prng"] = "mt19937_64";
  doc["seed"] = spec.seed;
  doc["target_pair_agreement"] = spec.target_pair_agreement;
  doc["agreeing_pixels"] = e.agreeing_pixels;
  doc["pair_agreement_fraction"] = e.pair_agreement_fraction;
  doc["confidence_value"] = spec.confidence;
  doc["mean_agreement"] = e.mean_agreement;
  doc["mean_confidence"] = e.mean_confidence;
  doc["mmcm"] = e.mmcm;
  doc["mmcm_formula"] = "rho * mean_pairs(sqrt(c_i*c_j)) * sqrt(mean(c))";
  json depth{{"pattern", to_string(spec.depth_pattern)},
             {"bins", kDefaultBins},
             {"tau", kDefaultTau}};
  if (e.depth_entropy) depth["depth_entropy"] = *e.depth_entropy;
  if (e.discontinuity_ratio) depth["discontinuity_ratio"] = *e.discontinuity_ratio;
  if (e.depth_mean) depth["depth_mean"] = *e.depth_mean;
  doc["depth"] = std::move(depth);

  std::ofstream out(out_dir / "expected.json", std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << "\n";
  if (!out) fail(ErrorCode::IoFailure, "cannot write expected.json");
  return m;
}

}  // namespace mmcm
