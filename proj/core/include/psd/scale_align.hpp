#pragma once

#include <cstddef>

#include "psd/raster.hpp"

namespace psd {

/// Affine map from relative (inverse-depth space) values to inverse metric depth.
struct ScaleShift {
  double gamma = 1.0;
  double rho = 0.0;
  double residual_rms = 0.0;  // inverse-depth units
  std::size_t inlier_count = 0;
};

struct FitOptions {
  // Drop the worst 10% of residuals and refit once.
  bool trimmed_refit = false;
};

/// Least-squares fit of gamma * relative + rho to 1 / sparse over measured
/// pixels. Throws DegenerateSystem when fewer than two measurements exist or
/// the relative values over them have (near) zero variance.
ScaleShift fit_scale_shift(const Raster& relative, const SparseDepth& sparse,
                           const FitOptions& options = {});

/// Sum of squared inverse-depth residuals for an arbitrary (gamma, rho).
double alignment_energy(const Raster& relative, const SparseDepth& sparse, double gamma,
                        double rho);

struct DepthClamp {
  double min = 0.1;
  double max = 300.0;
};

struct MetricDepth {
  Raster depth;
  // Pixels where gamma * relative + rho <= 0; they are set to clamp.max.
  std::size_t nonpositive_count = 0;
};

/// depth = 1 / (gamma * relative + rho), clamped into [clamp.min, clamp.max].
MetricDepth apply_scale_shift(const Raster& relative, const ScaleShift& ss,
                              const DepthClamp& clamp = {});

}  // namespace psd
