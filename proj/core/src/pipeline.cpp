#include "psd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "psd/affinity.hpp"
#include "psd/error.hpp"
#include "psd/raster_io.hpp"

namespace psd {

namespace fs = std::filesystem;

namespace {

struct Preset {
  const char* name;
  int k;
  PropagationMode mode;
};

// Per-dataset neighbor counts and scheduling.
constexpr Preset kPresets[] = {
    {"default", 1, PropagationMode::kSerial3dThen2d},
    {"cityscapes", 2, PropagationMode::kSerial3dThen2d},
    {"vkitti2", 3, PropagationMode::kParallelMean},
    {"tofdc", 8, PropagationMode::kSerial3dThen2d},
    {"diml", 12, PropagationMode::kSerial3dThen2d},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string canonical_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + value + "'");
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("missing required path: ") + what);
  if (!fs::exists(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

bool png16_representable(const Raster& r) {
  return std::all_of(r.values().begin(), r.values().end(),
                     [](double v) { return v >= 0.0 && v <= 65.535; });
}

}  // namespace

void PipelineConfig::validate() const {
  propagation.validate();
  correction.validate();
  if (!(clamp.min > 0.0 && clamp.min < clamp.max)) {
    throw ConfigError("clamp must satisfy 0 < clamp_min < clamp_max");
  }
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

void apply_preset(PipelineConfig& config, std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) {
      config.propagation.k = p.k;
      config.propagation.mode = p.mode;
      config.preset = p.name;
      return;
    }
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = canonical_key(trim(std::string_view(content).substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(std::string_view(content).substr(eq + 1));
  }
  return out;
}

void apply_settings(PipelineConfig& config, const std::map<std::string, std::string>& settings) {
  if (auto it = settings.find("preset"); it != settings.end()) apply_preset(config, it->second);
  for (const auto& [raw_key, value] : settings) {
    const std::string key = canonical_key(raw_key);
    if (key == "preset") continue;
    if (key == "rgb") config.paths.rgb = value;
    else if (key == "sparse") config.paths.sparse = value;
    else if (key == "relative") config.paths.relative = value;
    else if (key == "features") config.paths.features = value;
    else if (key == "intrinsics") config.paths.intrinsics = value;
    else if (key == "scorer_dir") config.paths.scorer_dir = value;
    else if (key == "output") config.paths.output = value;
    else if (key == "k") config.propagation.k = to_int(key, value);
    else if (key == "eta") config.propagation.eta = to_double(key, value);
    else if (key == "iterations_2d") config.propagation.iterations_2d = to_int(key, value);
    else if (key == "mode") {
      try {
        config.propagation.mode = parse_mode(value);
      } catch (const ValueError& e) {
        throw ConfigError(e.what());
      }
    }
    else if (key == "anchor_2d") config.propagation.anchor_2d = to_bool(key, value);
    else if (key == "prefill_sigma") config.propagation.prefill.sigma = to_double(key, value);
    else if (key == "prefill_radius") config.propagation.prefill.kernel_radius = to_int(key, value);
    else if (key == "prefill_max_rounds") config.propagation.prefill.max_rounds = to_int(key, value);
    else if (key == "slices" || key == "n") config.correction.n = to_int(key, value);
    else if (key == "tau") config.correction.tau = to_double(key, value);
    else if (key == "alpha_min") config.correction.alpha_min = to_double(key, value);
    else if (key == "alpha_max") config.correction.alpha_max = to_double(key, value);
    else if (key == "beta_min") config.correction.beta_min = to_double(key, value);
    else if (key == "beta_max") config.correction.beta_max = to_double(key, value);
    else if (key == "clamp_min") config.clamp.min = to_double(key, value);
    else if (key == "clamp_max") config.clamp.max = to_double(key, value);
    else if (key == "trimmed_fit") config.trimmed_fit = to_bool(key, value);
    else throw ConfigError("unknown config key '" + raw_key + "'");
  }
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  PipelineConfig config;
  apply_settings(config, parse_key_values(buf.str()));
  return config;
}

PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config,
                            const ResidualScorer* scorer) {
  config.validate();
  const SparseDepth& sparse = inputs.sparse;
  if (inputs.relative.channels() != 1) throw ValueError("relative depth must be single-channel");
  if (!inputs.relative.same_dims(sparse.raster())) {
    throw ValueError("relative depth and sparse depth dims differ");
  }
  if (inputs.rgb && !inputs.rgb->same_dims(inputs.relative)) {
    throw ValueError("rgb and relative depth dims differ");
  }
  if (inputs.features && !inputs.features->same_dims(inputs.relative)) {
    throw ValueError("feature raster and relative depth dims differ");
  }

  PipelineResult result;
  FitOptions fit;
  fit.trimmed_refit = config.trimmed_fit;
  result.scale_shift = fit_scale_shift(inputs.relative, sparse, fit);
  result.metric = apply_scale_shift(inputs.relative, result.scale_shift, config.clamp);
  if (result.metric.nonpositive_count > 0) {
    result.notes.push_back(std::to_string(result.metric.nonpositive_count) +
                           " pixels had a nonpositive inverse depth and were set to clamp_max");
  }

  FeatureMap features;
  if (inputs.features) {
    features = FeatureMap(*inputs.features);
    result.feature_source = "file";
  } else if (inputs.rgb) {
    features = FeatureMap(fallback_features(*inputs.rgb));
    result.feature_source = "fallback";
  } else {
    throw ValueError("either a feature raster or an RGB image is required");
  }

  const DualPropagationResult dual =
      run_dual_propagation(result.metric.depth, sparse, inputs.intrinsics, features, config.propagation);
  result.prefill = dual.prefill;
  result.initial = dual.initial;

  const HeuristicScorer fallback_scorer;
  const ResidualScorer& active = scorer != nullptr ? *scorer : fallback_scorer;
  result.scorer = active.name();
  const ScorerOutputs outputs =
      active.score(ScorerInputs{sparse, result.initial, &result.metric.depth, &features}, config.correction);
  result.final_depth = apply_correction(result.initial, outputs, config.correction);
  return result;
}

PipelineResult run_complete(const PipelineConfig& config) {
  config.validate();
  const PipelinePaths& paths = config.paths;
  require_file(paths.relative, "relative depth");
  require_file(paths.sparse, "sparse depth");
  require_file(paths.intrinsics, "intrinsics");
  if (paths.output.empty()) throw ConfigError("missing required path: output");

  PipelineInputs inputs;
  inputs.relative = load_raster(paths.relative);
  inputs.sparse = to_sparse(load_raster(paths.sparse));
  inputs.intrinsics = load_intrinsics(paths.intrinsics);

  std::vector<std::string> notes;
  const bool have_features = !paths.features.empty() && fs::exists(paths.features);
  if (have_features) {
    inputs.features = load_raster(paths.features);
  } else {
    if (!paths.features.empty()) notes.push_back("features file not found: " + paths.features.string());
    require_file(paths.rgb, "rgb image (needed for fallback features)");
  }
  if (!paths.rgb.empty() && fs::exists(paths.rgb)) {
    inputs.rgb = load_raster(paths.rgb);
  }

  std::unique_ptr<ResidualScorer> scorer;
  if (!paths.scorer_dir.empty()) {
    require_file(paths.scorer_dir, "scorer directory");
    scorer = std::make_unique<FileScorer>(paths.scorer_dir);
  }

  PipelineResult result = run_pipeline(inputs, config, scorer.get());
  result.notes.insert(result.notes.begin(), notes.begin(), notes.end());

  const bool png_init = png16_representable(result.initial);
  const bool png_final = png16_representable(result.final_depth);
  if (!png_init || !png_final) result.notes.push_back("depth exceeds png16 range; png outputs skipped");

  fs::create_directories(paths.output);
  write_raster(result.initial, paths.output / "d_init.dfr", RasterFormat::kDfr);
  write_raster(result.final_depth, paths.output / "depth.dfr", RasterFormat::kDfr);
  if (png_init) write_raster(result.initial, paths.output / "d_init.png", RasterFormat::kPng16);
  if (png_final) write_raster(result.final_depth, paths.output / "depth.png", RasterFormat::kPng16);

  std::ostringstream report;
  report << "status=ok\n";
  report << "height=" << inputs.relative.height() << "\nwidth=" << inputs.relative.width() << '\n';
  report << "measured_count=" << inputs.sparse.measured_count() << '\n';
  report << "gamma=" << format_double(result.scale_shift.gamma) << '\n';
  report << "rho=" << format_double(result.scale_shift.rho) << '\n';
  report << "residual_rms=" << format_double(result.scale_shift.residual_rms) << '\n';
  report << "inlier_count=" << result.scale_shift.inlier_count << '\n';
  report << "nonpositive_pixels=" << result.metric.nonpositive_count << '\n';
  report << "preset=" << config.preset << '\n';
  report << "k=" << config.propagation.k << '\n';
  report << "eta=" << format_double(config.propagation.eta) << '\n';
  report << "mode=" << mode_name(config.propagation.mode) << '\n';
  report << "iterations_2d=" << config.propagation.iterations_2d << '\n';
  report << "anchor_2d=" << (config.propagation.anchor_2d ? "on" : "off") << '\n';
  report << "slices=" << config.correction.n << '\n';
  report << "tau=" << format_double(config.correction.tau) << '\n';
  report << "feature_source=" << result.feature_source << '\n';
  report << "scorer=" << result.scorer << '\n';
  for (const auto& note : result.notes) report << "note=" << note << '\n';
  write_text(paths.output / "report.txt", report.str());
  return result;
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 5) {
      throw ConfigError("manifest line " + std::to_string(line_no) +
                        ": expected 'rgb sparse relative intrinsics output_stem'");
    }
    entries.push_back({tok[0], tok[1], tok[2], tok[3], tok[4]});
  }
  return entries;
}

std::vector<BatchOutcome> run_batch(const PipelineConfig& base,
                                    const std::vector<ManifestEntry>& entries, int workers) {
  std::vector<BatchOutcome> outcomes(entries.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      const ManifestEntry& e = entries[i];
      PipelineConfig cfg = base;
      cfg.paths.rgb = e.rgb;
      cfg.paths.sparse = e.sparse;
      cfg.paths.relative = e.relative;
      cfg.paths.intrinsics = e.intrinsics;
      cfg.paths.features.clear();
      cfg.paths.output = e.output_stem;
      outcomes[i].output_stem = e.output_stem;
      try {
        run_complete(cfg);
        outcomes[i].ok = true;
      } catch (const Error& err) {
        outcomes[i].error = err.kind() + ": " + err.what();
      } catch (const std::exception& err) {
        outcomes[i].error = std::string("Error: ") + err.what();
      }
    }
  };
  const int n = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(1, entries.size())));
  std::vector<std::jthread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  return outcomes;
}

}  // namespace psd
