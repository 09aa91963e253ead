#include "psd/correction.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "psd/camera.hpp"
#include "psd/error.hpp"
#include "psd/prefill.hpp"
#include "psd/raster_io.hpp"
#include "psd/spatial_index.hpp"

namespace psd {

namespace fs = std::filesystem;

void CorrectionParams::validate() const {
  if (n < 1) throw ValueError("slice parameter n must be at least 1");
  if (!(tau > 0.0)) throw ValueError("tau must be positive");
  for (double v : {alpha_min, alpha_max, beta_min, beta_max}) {
    if (!std::isfinite(v)) throw ValueError("alpha/beta must be finite");
  }
}

namespace {

void require_same(const Raster& a, const Raster& b, const char* what) {
  if (!a.same_dims(b)) throw ValueError(std::string(what) + ": dims differ");
}

void require_single(const Raster& r, const char* what) {
  if (r.channels() != 1) throw ValueError(std::string(what) + " must be single-channel");
}

}  // namespace

SparseResidual sparse_residual(const SparseDepth& sparse, const Raster& initial) {
  require_single(initial, "initial depth");
  require_same(sparse.raster(), initial, "sparse_residual");
  std::vector<double> out(initial.pixel_count(), 0.0);
  for (std::size_t i : sparse.measured_indices()) out[i] = sparse.value(i) - initial.at_index(i);
  return {Raster(initial.height(), initial.width(), 1, std::move(out)), sparse.mask()};
}

ResidualRange residual_range(const Raster& residual, const Raster& uncertainty,
                             const CorrectionParams& params) {
  require_single(residual, "residual");
  require_single(uncertainty, "uncertainty");
  require_same(residual, uncertainty, "residual_range");
  const std::size_t n = residual.pixel_count();
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double spread = (1.0 + uncertainty.at_index(i)) * std::abs(residual.at_index(i));
    lo[i] = params.beta_min - (1.0 + params.alpha_min) * spread;
    hi[i] = params.beta_max + (1.0 + params.alpha_max) * spread;
  }
  return {Raster(residual.height(), residual.width(), 1, std::move(lo)),
          Raster(residual.height(), residual.width(), 1, std::move(hi))};
}

Raster residual_slices(const ResidualRange& range, int n, const Raster& offset) {
  if (n < 1) throw ValueError("slice parameter n must be at least 1");
  require_same(range.min, range.max, "residual_slices");
  require_same(range.min, offset, "residual_slices offset");
  require_single(offset, "offset");
  const std::size_t count = range.min.pixel_count();
  const int s = n + 1;
  std::vector<double> out(count * s);
  for (std::size_t p = 0; p < count; ++p) {
    const double lo = range.min.at_index(p);
    const double hi = range.max.at_index(p);
    if (lo > hi) throw ValueError("residual range has R_min > R_max at pixel " + std::to_string(p));
    const double o = offset.at_index(p);
    for (int i = 0; i <= n; ++i) out[p * s + i] = lo + i * (hi - lo) / n + o;
  }
  return Raster(range.min.height(), range.min.width(), s, std::move(out));
}

Raster combine_scores(const Raster& slices, const Raster& logits) {
  require_same(slices, logits, "combine_scores");
  if (slices.channels() != logits.channels()) {
    throw ValueError("slices and logits disagree on slice count");
  }
  const int s = slices.channels();
  const std::size_t count = slices.pixel_count();
  std::vector<double> out(count);
  std::vector<double> p(s);
  for (std::size_t px = 0; px < count; ++px) {
    double mx = logits.at_index(px, 0);
    for (int i = 1; i < s; ++i) mx = std::max(mx, logits.at_index(px, i));
    double z = 0.0;
    for (int i = 0; i < s; ++i) {
      p[i] = std::exp(logits.at_index(px, i) - mx);
      z += p[i];
    }
    double r = 0.0;
    for (int i = 0; i < s; ++i) r += (p[i] / z) * slices.at_index(px, i);
    out[px] = r;
  }
  return Raster(slices.height(), slices.width(), 1, std::move(out));
}

ScorerOutputs ScorerOutputs::normalized(int height, int width, int slice_count) const {
  auto check = [&](const Raster& r, int channels, const char* what) {
    if (r.height() != height || r.width() != width || r.channels() != channels) {
      throw ValueError(std::string("scorer ") + what + " has shape " + std::to_string(r.height()) +
                       "x" + std::to_string(r.width()) + "x" + std::to_string(r.channels()) +
                       ", expected " + std::to_string(height) + "x" + std::to_string(width) +
                       "x" + std::to_string(channels));
    }
  };
  check(residual, 1, "residual");
  check(uncertainty, 1, "uncertainty");
  check(offset, 1, "offset");
  check(logits, slice_count, "logits");
  ScorerOutputs out = *this;
  std::vector<double> u(uncertainty.values().begin(), uncertainty.values().end());
  for (double& v : u) v = std::clamp(v, 0.0, 1.0);
  out.uncertainty = Raster(height, width, 1, std::move(u));
  return out;
}

Raster apply_correction(const Raster& initial, const ScorerOutputs& scorer,
                        const CorrectionParams& params) {
  params.validate();
  require_single(initial, "initial depth");
  const ScorerOutputs s = scorer.normalized(initial.height(), initial.width(), params.slice_count());
  const ResidualRange range = residual_range(s.residual, s.uncertainty, params);
  const Raster slices = residual_slices(range, params.n, s.offset);
  const Raster r_hat = combine_scores(slices, s.logits);
  std::vector<double> out(initial.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(initial.at_index(i) + r_hat.at_index(i), kMinCorrectedDepth);
  }
  return Raster(initial.height(), initial.width(), 1, std::move(out));
}

Raster uncertainty_target(const Raster& pred, const Raster& gt, double tau) {
  require_single(pred, "prediction");
  require_single(gt, "ground truth");
  require_same(pred, gt, "uncertainty_target");
  if (!(tau > 0.0)) throw ValueError("tau must be positive");
  std::vector<double> out(pred.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p = pred.at_index(i);
    const double g = gt.at_index(i);
    if (!(p > 0.0 && g > 0.0)) {
      throw ValueError("uncertainty target needs positive depth at pixel " + std::to_string(i));
    }
    out[i] = 1.0 - std::exp(-std::abs(p - g) / (tau * (p + g)));
  }
  return Raster(pred.height(), pred.width(), 1, std::move(out));
}

LossBreakdown loss_total(const Raster& pred, const Raster& gt, const Raster& uncertainty_pred,
                         double tau, const Mask& valid) {
  require_same(pred, gt, "loss_total");
  require_same(pred, uncertainty_pred, "loss_total uncertainty");
  if (valid.height != pred.height() || valid.width != pred.width()) {
    throw ValueError("loss mask dims differ");
  }
  if (!(tau > 0.0)) throw ValueError("tau must be positive");
  LossBreakdown out;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    if (!valid[i]) continue;
    const double p = pred.at_index(i);
    const double g = gt.at_index(i);
    if (!(p > 0.0 && g > 0.0)) {
      throw ValueError("loss needs positive depth at pixel " + std::to_string(i));
    }
    const double target = 1.0 - std::exp(-std::abs(p - g) / (tau * (p + g)));
    out.l1 += std::abs(p - g);
    out.l_unc += std::abs(uncertainty_pred.at_index(i) - target);
    ++count;
  }
  if (count == 0) throw EmptyMask("loss mask selects no pixel");
  out.l1 /= static_cast<double>(count);
  out.l_unc /= static_cast<double>(count);
  out.total = out.l1 + out.l_unc;
  return out;
}

// ---------------------------------------------------------------------------

ScorerOutputs ZeroScorer::score(const ScorerInputs& in, const CorrectionParams& params) const {
  const int h = in.initial.height();
  const int w = in.initial.width();
  return {Raster(h, w, 1), Raster(h, w, 1), Raster(h, w, 1), Raster(h, w, params.slice_count())};
}

ScorerOutputs FileScorer::score(const ScorerInputs& in, const CorrectionParams& params) const {
  return load_scorer_bundle(dir_).normalized(in.initial.height(), in.initial.width(),
                                             params.slice_count());
}

double HeuristicScorer::prior_gate(double relative_misfit) const {
  const double q = relative_misfit / options_.prior_gate_scale;
  return std::exp(-q * q);
}

ScorerOutputs HeuristicScorer::score(const ScorerInputs& in, const CorrectionParams& params) const {
  params.validate();
  const SparseDepth& sparse = in.sparse;
  const Raster& init = in.initial;
  require_same(sparse.raster(), init, "heuristic scorer");
  const int h = init.height();
  const int w = init.width();
  const std::size_t n = init.pixel_count();
  const int s = params.slice_count();

  // Gaussian extrapolation of the sparse residual.
  std::vector<double> extrap(n, 0.0);
  std::vector<std::uint8_t> filled(n, 0);
  for (std::size_t i : sparse.measured_indices()) {
    extrap[i] = sparse.value(i) - init.at_index(i);
    filled[i] = 1;
  }
  if (sparse.measured_count() > 0) {
    PrefillParams pp;
    pp.sigma = options_.sigma;
    normalized_convolution_fill(h, w, extrap, filled, pp);
  }

  double gate = 0.0;
  if (in.metric != nullptr && sparse.measured_count() > 0) {
    require_same(*in.metric, init, "heuristic scorer metric");
    double acc = 0.0;
    for (std::size_t i : sparse.measured_indices()) {
      const double e = (in.metric->at_index(i) - sparse.value(i)) / sparse.value(i);
      acc += e * e;
    }
    gate = prior_gate(std::sqrt(acc / static_cast<double>(sparse.measured_count())));
  }

  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (sparse.measured(i)) {
      residual[i] = sparse.value(i) - init.at_index(i);
    } else {
      const double ext = filled[i] ? extrap[i] : 0.0;
      const double prior = in.metric != nullptr ? in.metric->at_index(i) - init.at_index(i) : 0.0;
      residual[i] = (1.0 - gate) * ext + gate * prior;
    }
  }

  // Uncertainty from pixel distance to the nearest measurement, relative to
  // the mean measurement spacing.
  std::vector<double> uncertainty(n, 1.0);
  if (sparse.measured_count() > 0) {
    PointCloud grid;
    grid.height = h;
    grid.width = w;
    grid.points.resize(n);
    grid.measured.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      grid.points[i] = {static_cast<double>(i % w), static_cast<double>(i / w), 0.0};
    }
    for (std::size_t i : sparse.measured_indices()) grid.measured[i] = 1;
    const SpatialIndex index(grid);
    const double spacing = std::sqrt(static_cast<double>(n) / sparse.measured_count());
    for (std::size_t i = 0; i < n; ++i) {
      const double d = index.knn(grid.points[i], 1).distances.front();
      uncertainty[i] = 1.0 - std::exp(-d / spacing);
    }
  }

  ScorerOutputs out;
  out.residual = Raster(h, w, 1, std::move(residual));
  out.uncertainty = Raster(h, w, 1, std::move(uncertainty));
  out.offset = Raster(h, w, 1);

  // Put the softmax mass on the two slices bracketing the residual so the
  // combined residual reproduces it.
  const ResidualRange range = residual_range(out.residual, out.uncertainty, params);
  const Raster slices = residual_slices(range, params.n, out.offset);
  constexpr double kFloor = 1e-300;
  const double log_floor = std::log(kFloor);
  std::vector<double> logits(n * s, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const double lo = slices.at_index(p, 0);
    const double hi = slices.at_index(p, s - 1);
    if (!(hi > lo)) continue;  // collapsed range: every slice is equal
    const double t = std::clamp(out.residual.at_index(p), lo, hi);
    int j = 0;
    while (j + 1 < s - 1 && slices.at_index(p, j + 1) <= t) ++j;
    const double a = slices.at_index(p, j);
    const double b = slices.at_index(p, j + 1);
    const double frac = std::clamp((t - a) / (b - a), 0.0, 1.0);
    for (int i = 0; i < s; ++i) logits[p * s + i] = log_floor;
    logits[p * s + j] = std::log(std::max(1.0 - frac, kFloor));
    logits[p * s + j + 1] = std::log(std::max(frac, kFloor));
  }
  out.logits = Raster(h, w, s, std::move(logits));
  return out;
}

ScorerOutputs load_scorer_bundle(const fs::path& dir) {
  ScorerOutputs out;
  out.residual = load_raster(dir / "residual.dfr", RasterFormat::kDfr);
  out.uncertainty = load_raster(dir / "uncertainty.dfr", RasterFormat::kDfr);
  out.offset = load_raster(dir / "offset.dfr", RasterFormat::kDfr);
  out.logits = load_raster(dir / "logits.dfr", RasterFormat::kDfr);
  return out;
}

void write_scorer_bundle(const ScorerOutputs& outputs, const fs::path& dir) {
  fs::create_directories(dir);
  write_raster(outputs.residual, dir / "residual.dfr", RasterFormat::kDfr);
  write_raster(outputs.uncertainty, dir / "uncertainty.dfr", RasterFormat::kDfr);
  write_raster(outputs.offset, dir / "offset.dfr", RasterFormat::kDfr);
  write_raster(outputs.logits, dir / "logits.dfr", RasterFormat::kDfr);
}

}  // namespace psd
