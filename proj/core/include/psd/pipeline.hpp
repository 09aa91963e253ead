#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psd/camera.hpp"
#include "psd/correction.hpp"
#include "psd/propagation.hpp"
#include "psd/raster.hpp"
#include "psd/scale_align.hpp"

namespace psd {

struct PipelinePaths {
  std::filesystem::path rgb;
  std::filesystem::path sparse;
  std::filesystem::path relative;
  std::filesystem::path features;
  std::filesystem::path intrinsics;
  std::filesystem::path scorer_dir;
  std::filesystem::path output;  // directory
};

struct PipelineConfig {
  PipelinePaths paths;
  PropagationConfig propagation;
  CorrectionParams correction;
  DepthClamp clamp;
  bool trimmed_fit = false;
  std::string preset = "default";

  void validate() const;
};

/// Known presets: default, cityscapes, vkitti2, tofdc, diml.
std::vector<std::string> preset_names();
/// Sets k and mode for the named preset. Throws ConfigError if unknown.
void apply_preset(PipelineConfig& config, std::string_view name);

/// Parses `key = value` lines ('#' starts a comment). Throws ConfigError.
std::map<std::string, std::string> parse_key_values(std::string_view text);
/// Applies a key/value map onto `config`. A `preset` key is applied first so
/// explicit keys override it. Throws ConfigError on unknown keys or bad values.
void apply_settings(PipelineConfig& config, const std::map<std::string, std::string>& settings);
PipelineConfig load_config(const std::filesystem::path& path);

/// In-memory inputs of one completion run.
struct PipelineInputs {
  Raster relative;
  SparseDepth sparse;
  CameraIntrinsics intrinsics;
  std::optional<Raster> rgb;
  std::optional<Raster> features;
};

struct PipelineResult {
  ScaleShift scale_shift;
  MetricDepth metric;
  Raster prefill;
  Raster initial;
  Raster final_depth;
  std::string feature_source;  // "file" or "fallback"
  std::string scorer;
  std::vector<std::string> notes;
};

/// align -> prefill -> dual propagation -> correction. `scorer` defaults to the
/// heuristic scorer.
PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config,
                            const ResidualScorer* scorer = nullptr);

/// Loads inputs named in `config.paths`, runs the pipeline and writes
/// d_init.{dfr,png}, depth.{dfr,png} and report.txt to the output directory.
/// Every input is validated before anything is written.
PipelineResult run_complete(const PipelineConfig& config);

struct ManifestEntry {
  std::filesystem::path rgb;
  std::filesystem::path sparse;
  std::filesystem::path relative;
  std::filesystem::path intrinsics;
  std::string output_stem;
};

/// Whitespace-separated lines: rgb sparse relative intrinsics output_stem.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

struct BatchOutcome {
  std::string output_stem;
  bool ok = false;
  std::string error;  // "<Kind>: message" when !ok
};

/// Runs every entry with `base` as template (output = entry stem), using up to
/// `workers` threads. Outcomes are returned in manifest order.
std::vector<BatchOutcome> run_batch(const PipelineConfig& base,
                                    const std::vector<ManifestEntry>& entries, int workers);

}  // namespace psd
