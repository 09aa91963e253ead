#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "log.hpp"
#include "psd/affinity.hpp"
#include "psd/camera.hpp"
#include "psd/correction.hpp"
#include "psd/error.hpp"
#include "psd/metrics.hpp"
#include "psd/pipeline.hpp"
#include "psd/prefill.hpp"
#include "psd/propagation.hpp"
#include "psd/raster_io.hpp"
#include "psd/sampling.hpp"
#include "psd/scale_align.hpp"
#include "psd/synth.hpp"

namespace fs = std::filesystem;

namespace {

using namespace psd;

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Flags shared by every subcommand that runs part of the pipeline. Values
// left unset fall through to the config file, then to the built-in defaults.
struct TuningFlags {
  std::string config;
  std::string preset;
  std::optional<int> k;
  std::optional<double> eta;
  std::optional<std::string> mode;
  std::optional<int> iterations_2d;
  std::optional<int> slices;
  std::optional<double> tau;
  std::optional<double> clamp_min;
  std::optional<double> clamp_max;
  bool trimmed_fit = false;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "default, cityscapes, vkitti2, tofdc or diml");
    app->add_option("--k", k, "3D nearest neighbors");
    app->add_option("--eta", eta, "3D blend weight in [0, 1]");
    app->add_option("--mode", mode, "serial_3d_then_2d, serial_2d_then_3d or parallel_mean");
    app->add_option("--iterations-2d", iterations_2d, "2D propagation iterations");
    app->add_option("--slices", slices, "residual slice parameter n (n + 1 slices)");
    app->add_option("--tau", tau, "uncertainty temperature");
    app->add_option("--clamp-min", clamp_min, "metric depth lower clamp (m)");
    app->add_option("--clamp-max", clamp_max, "metric depth upper clamp (m)");
    app->add_flag("--trimmed-fit", trimmed_fit, "drop the worst 10% of measurements and refit");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_config(config);
    std::map<std::string, std::string> s;
    if (!preset.empty()) s["preset"] = preset;
    if (k) s["k"] = std::to_string(*k);
    if (eta) s["eta"] = num(*eta);
    if (mode) s["mode"] = *mode;
    if (iterations_2d) s["iterations_2d"] = std::to_string(*iterations_2d);
    if (slices) s["slices"] = std::to_string(*slices);
    if (tau) s["tau"] = num(*tau);
    if (clamp_min) s["clamp_min"] = num(*clamp_min);
    if (clamp_max) s["clamp_max"] = num(*clamp_max);
    if (trimmed_fit) s["trimmed_fit"] = "true";
    apply_settings(cfg, s);
    cfg.validate();
    return cfg;
  }
};

Raster load_single(const std::string& path, const char* what) {
  Raster r = load_raster(path);
  if (r.channels() != 1) throw ValueError(std::string(what) + " must be single-channel: " + path);
  return r;
}

void require_dims(const Raster& a, const Raster& b, const char* what) {
  if (!a.same_dims(b)) throw ValueError(std::string(what) + ": dims differ");
}

FeatureMap load_features(const std::string& features, const std::string& rgb, const Raster& like) {
  if (!features.empty()) {
    Raster f = load_raster(features);
    require_dims(f, like, "features");
    return FeatureMap(f);
  }
  if (rgb.empty()) throw ConfigError("either --features or --rgb is required");
  Raster img = load_raster(rgb);
  require_dims(img, like, "rgb");
  return FeatureMap(fallback_features(img));
}

// ---------------------------------------------------------------------------

struct CompleteCmd {
  TuningFlags tuning;
  PipelinePaths paths;
  std::string manifest;
  int workers = 1;

  void add_to(CLI::App* app) {
    tuning.add_to(app);
    app->add_option("--rgb", paths.rgb, "RGB raster (for fallback features)");
    app->add_option("--sparse", paths.sparse, "sparse depth raster");
    app->add_option("--relative", paths.relative, "relative (inverse-depth space) raster");
    app->add_option("--features", paths.features, "feature raster H x W x C");
    app->add_option("--intrinsics", paths.intrinsics, "intrinsics file 'fx fy cx cy'");
    app->add_option("--scorer-dir", paths.scorer_dir, "directory with a scorer bundle");
    app->add_option("--output", paths.output, "output directory");
    app->add_option("--manifest", manifest, "batch manifest: rgb sparse relative intrinsics stem");
    app->add_option("--workers", workers, "batch worker threads")->check(CLI::PositiveNumber);
  }

  int run() const {
    PipelineConfig cfg = tuning.resolve();
    auto set = [](fs::path& dst, const fs::path& src) {
      if (!src.empty()) dst = src;
    };
    set(cfg.paths.rgb, paths.rgb);
    set(cfg.paths.sparse, paths.sparse);
    set(cfg.paths.relative, paths.relative);
    set(cfg.paths.features, paths.features);
    set(cfg.paths.intrinsics, paths.intrinsics);
    set(cfg.paths.scorer_dir, paths.scorer_dir);
    set(cfg.paths.output, paths.output);

    if (!manifest.empty()) {
      const auto entries = load_manifest(manifest);
      const auto outcomes = run_batch(cfg, entries, workers);
      int failed = 0;
      for (const auto& o : outcomes) {
        if (o.ok) {
          std::cout << "entry=" << o.output_stem << " status=ok\n";
        } else {
          ++failed;
          std::cout << "entry=" << o.output_stem << " status=failed error=" << o.error << '\n';
        }
      }
      if (failed > 0) {
        cli::log_error("BatchError", std::to_string(failed) + " of " +
                                         std::to_string(outcomes.size()) + " entries failed");
        return 1;
      }
      return 0;
    }

    const PipelineResult r = run_complete(cfg);
    for (const auto& note : r.notes) cli::log_warn(note);
    std::cout << "gamma=" << num(r.scale_shift.gamma) << "\nrho=" << num(r.scale_shift.rho)
              << "\noutput=" << cfg.paths.output.string() << '\n';
    return 0;
  }
};

struct AlignCmd {
  TuningFlags tuning;
  std::string relative, sparse, output;

  void add_to(CLI::App* app) {
    tuning.add_to(app);
    app->add_option("--relative", relative)->required();
    app->add_option("--sparse", sparse)->required();
    app->add_option("--output", output, "aligned metric depth raster")->required();
  }

  int run() const {
    const PipelineConfig cfg = tuning.resolve();
    const Raster rel = load_single(relative, "relative depth");
    const SparseDepth s = to_sparse(load_single(sparse, "sparse depth"));
    FitOptions fit;
    fit.trimmed_refit = cfg.trimmed_fit;
    const ScaleShift ss = fit_scale_shift(rel, s, fit);
    const MetricDepth m = apply_scale_shift(rel, ss, cfg.clamp);
    write_raster(m.depth, output);
    std::cout << "gamma=" << num(ss.gamma) << "\nrho=" << num(ss.rho)
              << "\nresidual_rms=" << num(ss.residual_rms) << "\ninlier_count=" << ss.inlier_count
              << "\nnonpositive_pixels=" << m.nonpositive_count << '\n';
    return 0;
  }
};

struct PrefillCmd {
  TuningFlags tuning;
  std::string sparse, output;
  std::optional<double> sigma;
  std::optional<int> radius, max_rounds;

  void add_to(CLI::App* app) {
    tuning.add_to(app);
    app->add_option("--sparse", sparse)->required();
    app->add_option("--output", output)->required();
    app->add_option("--sigma", sigma, "Gaussian sigma in pixels");
    app->add_option("--radius", radius, "kernel radius (0: ceil(3 sigma))");
    app->add_option("--max-rounds", max_rounds);
  }

  int run() const {
    PrefillParams p = tuning.resolve().propagation.prefill;
    if (sigma) p.sigma = *sigma;
    if (radius) p.kernel_radius = *radius;
    if (max_rounds) p.max_rounds = *max_rounds;
    p.validate();
    const Raster out = prefill_gaussian(to_sparse(load_single(sparse, "sparse depth")), p);
    write_raster(out, output);
    return 0;
  }
};

struct PropagateCmd {
  TuningFlags tuning;
  std::string metric, sparse, intrinsics, features, rgb, output;

  void add_to(CLI::App* app) {
    tuning.add_to(app);
    app->add_option("--metric", metric, "aligned metric depth")->required();
    app->add_option("--sparse", sparse)->required();
    app->add_option("--intrinsics", intrinsics)->required();
    app->add_option("--features", features);
    app->add_option("--rgb", rgb);
    app->add_option("--output", output, "initial dense depth")->required();
  }

  int run() const {
    const PipelineConfig cfg = tuning.resolve();
    const Raster m = load_single(metric, "metric depth");
    const SparseDepth s = to_sparse(load_single(sparse, "sparse depth"));
    require_dims(m, s.raster(), "metric vs sparse");
    const CameraIntrinsics k = load_intrinsics(intrinsics);
    const FeatureMap f = load_features(features, rgb, m);
    const DualPropagationResult r = run_dual_propagation(m, s, k, f, cfg.propagation);
    write_raster(r.initial, output);
    return 0;
  }
};

struct CorrectCmd {
  TuningFlags tuning;
  std::string initial, sparse, metric, scorer_dir, output;
  std::string scorer = "heuristic";

  void add_to(CLI::App* app) {
    tuning.add_to(app);
    app->add_option("--initial", initial, "initial dense depth")->required();
    app->add_option("--sparse", sparse)->required();
    app->add_option("--metric", metric, "aligned metric depth (heuristic prior)");
    app->add_option("--scorer", scorer, "heuristic or zero")->check(CLI::IsMember({"heuristic", "zero"}));
    app->add_option("--scorer-dir", scorer_dir, "scorer bundle directory (overrides --scorer)");
    app->add_option("--output", output)->required();
  }

  int run() const {
    const PipelineConfig cfg = tuning.resolve();
    const Raster init = load_single(initial, "initial depth");
    const SparseDepth s = to_sparse(load_single(sparse, "sparse depth"));
    require_dims(init, s.raster(), "initial vs sparse");
    std::optional<Raster> m;
    if (!metric.empty()) {
      m = load_single(metric, "metric depth");
      require_dims(*m, init, "metric vs initial");
    }
    std::unique_ptr<ResidualScorer> active;
    if (!scorer_dir.empty()) {
      active = std::make_unique<FileScorer>(scorer_dir);
    } else if (scorer == "zero") {
      active = std::make_unique<ZeroScorer>();
    } else {
      active = std::make_unique<HeuristicScorer>();
    }
    const ScorerOutputs so =
        active->score(ScorerInputs{s, init, m ? &*m : nullptr, nullptr}, cfg.correction);
    write_raster(apply_correction(init, so, cfg.correction), output);
    return 0;
  }
};

struct MetricsCmd {
  std::string pred, gt, mask, error_map;
  std::vector<double> thresholds = kDefaultDeltaThresholds;
  double max_error = 0.0;
  bool json = false;

  void add_to(CLI::App* app) {
    app->add_option("--pred", pred)->required();
    app->add_option("--gt", gt)->required();
    app->add_option("--mask", mask, "raster; nonzero pixels are evaluated");
    app->add_option("--thresholds", thresholds, "delta thresholds")->delimiter(',');
    app->add_flag("--json", json, "single-line JSON instead of key=value lines");
    app->add_option("--error-map", error_map, "write an absolute-error PNG");
    app->add_option("--max-error", max_error, "error-map saturation in meters (0: auto)");
  }

  int run() const {
    const Raster p = load_single(pred, "prediction");
    const Raster g = load_single(gt, "ground truth");
    std::optional<Mask> m;
    if (!mask.empty()) {
      const Raster mr = load_single(mask, "mask");
      require_dims(mr, g, "mask vs ground truth");
      m = Mask(mr.height(), mr.width());
      for (std::size_t i = 0; i < mr.pixel_count(); ++i) m->bits[i] = mr.at_index(i) != 0.0;
    }
    const MetricsReport r = compute_metrics(p, g, m ? &*m : nullptr, thresholds);
    if (!error_map.empty()) write_error_map(p, g, error_map, max_error);
    std::cout << (json ? format_metrics_json(r) + "\n" : format_metrics_text(r));
    return 0;
  }
};

struct SampleCmd {
  CLI::App* random_app = nullptr;
  CLI::App* harris_app = nullptr;
  CLI::App* holes_app = nullptr;
  std::string gt, rgb, sparse, output;
  double rate = kStandardSamplingRate;
  std::size_t max_points = 100;
  std::size_t count = 4;
  RadiusRange radii;
  std::uint64_t seed = 0;

  void add_to(CLI::App* app) {
    app->require_subcommand(1);
    random_app = app->add_subcommand("random", "uniform random measurements");
    random_app->add_option("--gt", gt)->required();
    random_app->add_option("--rate", rate, "sampling rate in (0, 1]");
    harris_app = app->add_subcommand("harris", "measurements at Harris corners");
    harris_app->add_option("--rgb", rgb)->required();
    harris_app->add_option("--gt", gt)->required();
    harris_app->add_option("--max-points", max_points);
    holes_app = app->add_subcommand("holes", "zero out measurements in random ellipses");
    holes_app->add_option("--sparse", sparse)->required();
    holes_app->add_option("--count", count);
    holes_app->add_option("--radius-min", radii.min);
    holes_app->add_option("--radius-max", radii.max);
    for (CLI::App* sub : {random_app, harris_app, holes_app}) {
      sub->add_option("--seed", seed);
      sub->add_option("--output", output)->required();
    }
  }

  int run() const {
    SparseDepth out;
    if (random_app->parsed()) {
      out = sample_random(load_single(gt, "ground truth"), rate, seed);
    } else if (harris_app->parsed()) {
      out = sample_harris(load_raster(rgb), load_single(gt, "ground truth"), max_points, seed);
      if (out.measured_count() == 0) cli::log_warn("no Harris corners found; sparse map is empty");
    } else {
      out = apply_pseudo_holes(to_sparse(load_single(sparse, "sparse depth")), count, radii, seed);
    }
    write_raster(out.raster(), output);
    std::cout << "measured_count=" << out.measured_count() << '\n';
    return 0;
  }
};

struct SynthCmd {
  std::string output;
  std::uint64_t seed = 0;
  int height = 64;
  int width = 64;
  double gamma = 1.0;
  double rho = 0.0;
  double noise = 0.0;
  double rate = kStandardSamplingRate;

  void add_to(CLI::App* app) {
    app->add_option("--output", output, "bundle directory")->required();
    app->add_option("--seed", seed);
    app->add_option("--height", height)->check(CLI::PositiveNumber);
    app->add_option("--width", width)->check(CLI::PositiveNumber);
    app->add_option("--gamma", gamma, "true scale of the relative depth");
    app->add_option("--rho", rho, "true shift of the relative depth");
    app->add_option("--noise", noise, "multiplicative noise sigma on relative depth");
    app->add_option("--rate", rate, "sampling rate of sparse.dfr");
  }

  int run() const {
    SceneSpec spec;
    spec.layout = random_room_layout(seed);
    spec.height = height;
    spec.width = width;
    spec.gamma = gamma;
    spec.rho = rho;
    spec.noise_sigma = noise;
    const SyntheticScene scene = synth_scene(spec, seed);
    const SparseDepth sparse = sample_random(scene.gt_depth, rate, seed);

    const fs::path dir(output);
    fs::create_directories(dir);
    write_raster(scene.rgb, dir / "rgb.dfr");
    write_png_rgb8(scene.rgb, dir / "rgb.png");
    write_raster(scene.gt_depth, dir / "gt.dfr");
    write_raster(scene.relative_depth, dir / "relative.dfr");
    write_raster(sparse.raster(), dir / "sparse.dfr");
    write_intrinsics(scene.intrinsics, dir / "intrinsics.txt");
    std::cout << "output=" << dir.string() << "\nmeasured_count=" << sparse.measured_count() << '\n';
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth completion from sparse measurements and a relative depth prior", "psd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "psd 0.1.0");

  CompleteCmd complete;
  AlignCmd align;
  PrefillCmd prefill;
  PropagateCmd propagate;
  CorrectCmd correct;
  MetricsCmd metrics;
  SampleCmd sample;
  SynthCmd synth;

  complete.add_to(app.add_subcommand("complete", "run the full pipeline"));
  align.add_to(app.add_subcommand("align", "fit scale and shift, write metric depth"));
  prefill.add_to(app.add_subcommand("prefill", "Gaussian pre-fill of sparse depth"));
  propagate.add_to(app.add_subcommand("propagate", "dual-space propagation"));
  correct.add_to(app.add_subcommand("correct", "residual correction"));
  metrics.add_to(app.add_subcommand("metrics", "evaluate a prediction"));
  sample.add_to(app.add_subcommand("sample", "sparse measurement patterns"));
  synth.add_to(app.add_subcommand("synth", "render a synthetic scene bundle"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    psd::cli::log_error("ConfigError", e.what());
    return 1;
  }

  try {
    const std::string& name = app.get_subcommands().front()->get_name();
    if (name == "complete") return complete.run();
    if (name == "align") return align.run();
    if (name == "prefill") return prefill.run();
    if (name == "propagate") return propagate.run();
    if (name == "correct") return correct.run();
    if (name == "metrics") return metrics.run();
    if (name == "sample") return sample.run();
    if (name == "synth") return synth.run();
  } catch (const psd::Error& e) {
    psd::cli::log_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    psd::cli::log_error("Error", e.what());
    return 1;
  }
  return 1;
}
